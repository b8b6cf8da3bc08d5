#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use paint_wars::bridge::{format_request, BridgeConfig, Client, Server, RESET, SWAP_RESET};
use paint_wars::env::{Agent, EnvState, Owner, NUM_TILES, OBS_DIM};
use paint_wars::net::{forward, init_params_indexed, NetConfig};
use paint_wars::ppo::{ppo_loss_and_grad, PpoHyperparams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Set to regenerate the golden transcripts from the current server.
pub const BLESS_VAR: &str = "TPW_BLESS_GOLDEN";

pub const TRANSCRIPTS: [&str; 2] = ["full_episode", "swap_and_errors"];

/// Published per-seed cumulative self-play and vs-random win rates (%).
pub const SEED_SELF_PLAY_WR: [f64; 10] = [64.0, 55.4, 49.9, 67.1, 56.1, 55.5, 55.6, 56.3, 59.0, 58.4];
pub const SEED_VS_RANDOM_WR: [f64; 10] = [93.9, 56.8, 84.8, 90.8, 55.7, 75.8, 80.6, 74.7, 79.2, 78.5];

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn random_steps(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| format_request(rng.random_range(0..5), rng.random_range(0..5)))
        .collect()
}

/// The request lines of a transcript, generated from a fixed seed.
pub fn generate_requests(name: &str) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut r = Vec::new();
    match name {
        "full_episode" => {
            r.push(format_request(RESET, 0));
            r.extend(random_steps(&mut rng, 250));
            r.push(format_request(0, 0));
            r.push(format_request(RESET, 0));
            r.extend(random_steps(&mut rng, 3));
        }
        "swap_and_errors" => {
            r.push(format_request(0, 0));
            r.push(format_request(SWAP_RESET, 0));
            r.extend(random_steps(&mut rng, 20));
            r.push("not json".into());
            r.push(format_request(7, 0));
            r.push(format_request(0, -5));
            r.push(r#"{"pink_action":0}"#.into());
            r.push(r#"{"pink_action":1,"green_action":2,"note":"extra fields are ignored"}"#.into());
            r.push("[]".into());
            r.push(r#"{"pink_action":-1}"#.into());
            r.extend(random_steps(&mut rng, 5));
        }
        other => panic!("unknown transcript {other}"),
    }
    r
}

fn join_lines(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Sends `requests` to a fresh server over TCP and collects the replies.
pub fn replay_over_tcp(requests: &[String]) -> Vec<String> {
    let server = Server::bind("127.0.0.1:0", BridgeConfig::default()).expect("bind");
    let addr = server.local_addr().unwrap();
    let handle = thread::spawn(move || server.serve_one());
    let mut client = Client::connect(addr).expect("connect");
    let replies = requests.iter().map(|l| client.exchange(l).expect("reply")).collect();
    drop(client);
    handle.join().unwrap().expect("session");
    replies
}

/// Replays one golden transcript, or rewrites it when blessing. Returns a
/// description of the first difference on failure.
pub fn check_golden(name: &str) -> Result<(), String> {
    let dir = golden_dir();
    let req_path = dir.join(format!("{name}.requests.ndjson"));
    let rep_path = dir.join(format!("{name}.replies.ndjson"));
    if std::env::var_os(BLESS_VAR).is_some() {
        let requests = generate_requests(name);
        let replies = replay_over_tcp(&requests);
        fs::create_dir_all(&dir).unwrap();
        fs::write(&req_path, join_lines(&requests)).unwrap();
        fs::write(&rep_path, join_lines(&replies)).unwrap();
        return Ok(());
    }
    let req_text = fs::read_to_string(&req_path).map_err(|e| format!("{}: {e}", req_path.display()))?;
    let want = fs::read(&rep_path).map_err(|e| format!("{}: {e}", rep_path.display()))?;
    let requests: Vec<String> = req_text.lines().map(str::to_string).collect();
    if requests != generate_requests(name) {
        return Err(format!("{name}: stored requests differ from the generator"));
    }
    let got = join_lines(&replay_over_tcp(&requests));
    if got.as_bytes() == want.as_slice() {
        return Ok(());
    }
    let want_text = String::from_utf8_lossy(&want);
    let line = got
        .lines()
        .zip(want_text.lines())
        .position(|(a, b)| a != b)
        .map(|i| i + 1)
        .unwrap_or_else(|| got.lines().count().min(want_text.lines().count()) + 1);
    Err(format!("{name}: reply line {line} differs"))
}

/// One gradient-check draw on a small double-precision network: the
/// largest relative error over `coords` sampled parameters between the
/// analytic PPO-loss gradient and a central difference.
pub fn gradient_check_draw(draw: u64, coords: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9 ^ draw);
    let mut params = init_params_indexed::<f64>(NetConfig::tiny(), draw, 0).unwrap();
    for v in params.as_mut_slice() {
        *v += 0.2 * (rng.random::<f64>() - 0.5);
    }
    let batch = 6;
    let obs: Vec<f64> = (0..batch * OBS_DIM).map(|_| rng.random::<f64>()).collect();
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..5)).collect();
    let trace = forward(&params, &obs, batch).unwrap();
    // Behaviour log-probs within ±0.05 of the current ones keep every
    // ratio well inside the clip range, away from the surrogate's kinks.
    let old: Vec<f64> = (0..batch)
        .map(|i| trace.log_prob_row(i)[actions[i]] + 0.1 * (rng.random::<f64>() - 0.5))
        .collect();
    let adv: Vec<f64> = (0..batch).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let ret: Vec<f64> = (0..batch).map(|_| rng.random::<f64>() * 2.0).collect();
    let hp = PpoHyperparams::default();
    let loss = |p: &paint_wars::net::ActorCriticParams<f64>| {
        ppo_loss_and_grad(p, &obs, &actions, &old, &adv, &ret, &hp).unwrap().0.total
    };
    let (_, grads) = ppo_loss_and_grad(&params, &obs, &actions, &old, &adv, &ret, &hp).unwrap();
    let n = params.as_slice().len();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..coords {
        let i = rng.random_range(0..n);
        let orig = params.as_slice()[i];
        params.as_mut_slice()[i] = orig + h;
        let up = loss(&params);
        params.as_mut_slice()[i] = orig - h;
        let down = loss(&params);
        params.as_mut_slice()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grads.as_slice()[i];
        let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    worst
}

/// Invariant violations between two consecutive states.
pub fn invariant_violations(before: &EnvState, after: &EnvState) -> Vec<String> {
    let mut v = Vec::new();
    let tiles = after.board.tiles();
    let pink = tiles.iter().filter(|t| t.owner == Owner::Pink).count();
    let green = tiles.iter().filter(|t| t.owner == Owner::Green).count();
    let neutral = tiles.iter().filter(|t| t.owner == Owner::Neutral).count();
    if pink + green + neutral != NUM_TILES {
        v.push("tile counts do not sum to the board size".into());
    }
    if after.tiles(Agent::Pink) as usize != pink || after.tiles(Agent::Green) as usize != green {
        v.push("cached tile counts disagree with the board".into());
    }
    for (i, (b, a)) in before.board.tiles().iter().zip(tiles).enumerate() {
        if b.locked && (!a.locked || a.owner != b.owner) {
            v.push(format!("locked tile {i} changed"));
        }
        if a.locked && a.owner == Owner::Neutral {
            v.push(format!("neutral tile {i} is locked"));
        }
    }
    for agent in Agent::BOTH {
        let owner = Owner::from(agent);
        let locked = tiles.iter().filter(|t| t.locked && t.owner == owner).count();
        if after.locks(agent) as usize != locked {
            v.push(format!("{agent:?} lock total disagrees with the board"));
        }
        if after.locks(agent) < before.locks(agent) {
            v.push(format!("{agent:?} lock total decreased"));
        }
    }
    v
}
