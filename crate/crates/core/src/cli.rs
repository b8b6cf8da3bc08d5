//! The `tpw` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::bridge::{BridgeConfig, Server};
use crate::eval::{
    evaluate_checkpoint_file, fairness_check, mean, one_sample_t, pearson_r, sample_std, EvalError, EvalOptions, EvalReport,
    StatsError,
};
use crate::net::NetConfig;
use crate::trainer::{parse_metrics, EpisodeMetrics, Preset, RunManifest, TrainConfig, TrainError, Trainer, MANIFEST_FILE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

fn preset_help() -> String {
    let mut s = String::from("Presets:\n");
    for p in Preset::ALL {
        s.push_str(&format!("  {:<12} {}\n", p.name(), p.flag_expansion()));
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "tpw", version, about = "Territory Paint Wars: self-play PPO training, evaluation and a TCP bridge")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train Pink and Green by self-play.
    #[command(after_help = preset_help())]
    Train(TrainArgs),
    /// Evaluate a checkpoint against a uniformly random opponent.
    Eval(EvalArgs),
    /// Random-vs-random games from both starting layouts.
    Fairness(FairnessArgs),
    /// Serve the game over TCP (newline-delimited JSON).
    Serve(ServeArgs),
    /// Summary statistics over several runs.
    Stats(StatsArgs),
    /// Columnar series from a metrics log, for plotting.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Total episodes (default 12000).
    #[arg(long)]
    pub episodes: Option<u64>,
    /// Fraction of episodes in which Green plays uniformly at random;
    /// overrides the preset.
    #[arg(long = "opponent-random")]
    pub opponent_random: Option<f64>,
    #[arg(long, default_value = "v3_full", value_parser = parse_preset)]
    pub preset: Preset,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "checkpoint-interval", default_value_t = 1000)]
    pub checkpoint_interval: u64,
    /// Set lambda to 1 (Monte-Carlo returns).
    #[arg(long = "mc-returns")]
    pub mc_returns: bool,
    /// Do not normalise advantages.
    #[arg(long = "no-adv-norm")]
    pub no_adv_norm: bool,
    /// Comma-separated trunk widths, e.g. 16,8,8.
    #[arg(long, value_delimiter = ',')]
    pub trunk: Option<Vec<usize>>,
    #[arg(long = "head-hidden")]
    pub head_hidden: Option<usize>,
    /// Record per-episode wall-clock time in the metrics.
    #[arg(long = "log-wall-clock")]
    pub log_wall_clock: bool,
    /// Continue the run in --out from its latest checkpoint.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub games: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub greedy: bool,
    #[arg(long = "swap-starts")]
    pub swap_starts: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FairnessArgs {
    #[arg(long, default_value_t = 1000)]
    pub games: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 9000)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Recorded in the log; the game itself has no randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Append one JSON line per finished episode to this file.
    #[arg(long = "episode-log")]
    pub episode_log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Training metrics logs (JSONL), one per run.
    #[arg(long, num_args = 1.., required = true)]
    pub metrics: Vec<PathBuf>,
    /// Evaluation reports (JSON), paired with --metrics in order.
    #[arg(long, num_args = 1..)]
    pub eval: Vec<PathBuf>,
    /// Null-hypothesis means (percent) for the t-tests.
    #[arg(long = "mu0", num_args = 1.., default_values_t = [50.0, 21.6])]
    pub mu0: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PlotdataArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    execute(cli.command, out)
}

/// Entry point for the binary: real arguments, stdout, one-line errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().lines().next().unwrap_or("unknown"));
            ExitCode::FAILURE
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train(a) => train(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Fairness(a) => {
            let r = fairness_check(a.games, a.seed)?;
            writeln!(
                out,
                "standard: pink {:.1}%  green {:.1}%  ties {:.1}%",
                100.0 * r.standard.pink_wr,
                100.0 * r.standard.green_wr,
                100.0 * r.standard.tie_rate
            )?;
            writeln!(
                out,
                "swapped:  pink {:.1}%  green {:.1}%  ties {:.1}%",
                100.0 * r.swapped.pink_wr,
                100.0 * r.swapped.green_wr,
                100.0 * r.swapped.tie_rate
            )?;
            writeln!(out, "{}", to_json(&r))?;
            Ok(())
        }
        Command::Serve(a) => {
            let config = BridgeConfig {
                episode_log: a.episode_log,
                ..BridgeConfig::default()
            };
            let server = Server::bind((a.host.as_str(), a.port), config)?;
            writeln!(out, "listening on {} (seed {})", server.local_addr()?, a.seed)?;
            out.flush()?;
            server.run()?;
            Ok(())
        }
        Command::Stats(a) => stats(a, out),
        Command::Plotdata(a) => {
            let metrics = read_metrics(&a.metrics)?;
            let series = PlotSeries::from_metrics(&metrics);
            fs::write(&a.out, to_json(&series)).map_err(|e| file_err(&a.out, e))?;
            writeln!(out, "wrote {} episodes to {}", metrics.len(), a.out.display())?;
            Ok(())
        }
    }
}

/// Resolves the train flags into a full configuration.
pub fn train_config(a: &TrainArgs) -> TrainConfig {
    let mut c = TrainConfig::from_preset(a.preset, a.seed);
    if let Some(e) = a.episodes {
        c.episodes = e;
    }
    if let Some(eps) = a.opponent_random {
        c.opponent_random = eps;
    }
    if a.mc_returns {
        c.ppo.lambda = 1.0;
    }
    if a.no_adv_norm {
        c.ppo.normalize_advantages = false;
    }
    if a.trunk.is_some() || a.head_hidden.is_some() {
        let d = NetConfig::default();
        c.net = NetConfig {
            trunk: a.trunk.clone().unwrap_or(d.trunk),
            head_hidden: a.head_hidden.unwrap_or(d.head_hidden),
            ..d
        };
    }
    c.checkpoint_interval = a.checkpoint_interval;
    c.log_wall_clock = a.log_wall_clock;
    c.out_dir = Some(a.out.clone());
    c
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut trainer = if a.resume {
        let path = a.out.join(MANIFEST_FILE);
        let text = fs::read(&path).map_err(|e| file_err(&path, e))?;
        let manifest: RunManifest =
            serde_json::from_slice(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut config = manifest.config;
        if let Some(e) = a.episodes {
            config.episodes = e;
        }
        config.out_dir = Some(a.out.clone());
        Trainer::resume(config)?
    } else {
        Trainer::new(train_config(&a))?
    };
    let total = trainer.config().episodes;
    while trainer.episode() < total {
        let m = trainer.run_episode()?;
        if m.ep % 100 == 0 {
            eprintln!(
                "ep {:>6}  wr_roll100 {:.2}  wr_cum {:.3}  ret {:+.1}/{:+.1}  ent {:.3}",
                m.ep, m.wr_roll100, m.wr_cum, m.ret_pink, m.ret_green, m.ent_pink
            );
        }
    }
    let summary = trainer.run()?;
    writeln!(out, "{}", to_json(&summary))?;
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let options = EvalOptions {
        greedy: a.greedy,
        swap_starts: a.swap_starts,
    };
    let r = evaluate_checkpoint_file(&a.checkpoint, a.games, a.seed, options)?;
    writeln!(
        out,
        "win rate {:.1}% ({} W / {} L / {} T of {}), 95% Wilson [{:.1}%, {:.1}%], half-width {:.1} pp",
        100.0 * r.win_rate,
        r.wins,
        r.losses,
        r.ties,
        r.games,
        100.0 * r.wilson.low,
        100.0 * r.wilson.high,
        100.0 * r.wilson.half_width
    )?;
    if let Some(p) = &a.out {
        fs::write(p, to_json(&r)).map_err(|e| file_err(p, e))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct RunRow {
    metrics: String,
    episodes: u64,
    cum_wr: f64,
    final_roll100: f64,
    vs_random: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TTest {
    mu0: f64,
    t: f64,
    dof: usize,
}

#[derive(Debug, Serialize)]
struct StatsReport {
    runs: Vec<RunRow>,
    vs_random_mean: Option<f64>,
    vs_random_std: Option<f64>,
    t_tests: Vec<TTest>,
    pearson_cum_vs_random: Option<f64>,
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !a.eval.is_empty() && a.eval.len() != a.metrics.len() {
        return Err(CliError::Usage(format!("{} metrics files but {} eval reports", a.metrics.len(), a.eval.len())));
    }
    let mut runs = Vec::new();
    for (i, path) in a.metrics.iter().enumerate() {
        let m = read_metrics(path)?;
        let last = m.last().ok_or_else(|| CliError::Usage(format!("{}: no episodes", path.display())))?;
        let vs_random = match a.eval.get(i) {
            Some(p) => {
                let text = fs::read(p).map_err(|e| file_err(p, e))?;
                let r: EvalReport = serde_json::from_slice(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                Some(100.0 * r.win_rate)
            }
            None => None,
        };
        runs.push(RunRow {
            metrics: path.display().to_string(),
            episodes: last.ep,
            cum_wr: 100.0 * last.wr_cum,
            final_roll100: 100.0 * last.wr_roll100,
            vs_random,
        });
    }
    let vs: Vec<f64> = runs.iter().filter_map(|r| r.vs_random).collect();
    let cum: Vec<f64> = runs.iter().map(|r| r.cum_wr).collect();
    let mut report = StatsReport {
        runs,
        vs_random_mean: None,
        vs_random_std: None,
        t_tests: Vec::new(),
        pearson_cum_vs_random: None,
    };
    for row in &report.runs {
        let vs = row.vs_random.map(|v| format!("{v:.1}%")).unwrap_or_else(|| "-".into());
        writeln!(out, "{:<40} cum {:>5.1}%  vs-random {:>6}", row.metrics, row.cum_wr, vs)?;
    }
    if vs.len() >= 2 {
        let (m, s) = (mean(&vs)?, sample_std(&vs)?);
        writeln!(out, "vs-random mean ± std: {m:.1} ± {s:.1}%")?;
        report.vs_random_mean = Some(m);
        report.vs_random_std = Some(s);
        for mu0 in &a.mu0 {
            let (t, dof) = one_sample_t(&vs, *mu0)?;
            writeln!(out, "t({dof}) = {t:.2} against mu0 = {mu0}")?;
            report.t_tests.push(TTest { mu0: *mu0, t, dof });
        }
        let r = pearson_r(&cum, &vs)?;
        writeln!(out, "Pearson r (cumulative WR, vs-random WR) = {r:.2}")?;
        report.pearson_cum_vs_random = Some(r);
    }
    writeln!(out, "{}", to_json(&report))?;
    Ok(())
}

/// Columnar copy of the per-episode metrics.
#[derive(Debug, Default, Serialize)]
pub struct PlotSeries {
    pub ep: Vec<u64>,
    pub wr_roll100: Vec<f64>,
    pub wr_cum: Vec<f64>,
    pub ent_pink: Vec<f64>,
    pub ent_green: Vec<f64>,
    pub ev_pink: Vec<f64>,
    pub ev_green: Vec<f64>,
    pub ret_pink: Vec<f64>,
    pub ret_green: Vec<f64>,
}

impl PlotSeries {
    pub fn from_metrics(m: &[EpisodeMetrics]) -> Self {
        let mut s = PlotSeries::default();
        for r in m {
            s.ep.push(r.ep);
            s.wr_roll100.push(r.wr_roll100);
            s.wr_cum.push(r.wr_cum);
            s.ent_pink.push(r.ent_pink);
            s.ent_green.push(r.ent_green);
            s.ev_pink.push(r.ev_pink);
            s.ev_green.push(r.ev_green);
            s.ret_pink.push(r.ret_pink);
            s.ret_green.push(r.ret_green);
        }
        s
    }
}

fn read_metrics(path: &Path) -> Result<Vec<EpisodeMetrics>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    parse_metrics(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn file_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::File {
        path: path.to_path_buf(),
        source,
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report serializes")
}
