use std::fs;

use paint_wars::cli::run;
use paint_wars::eval::EvalReport;

fn run_ok(args: &[&str]) -> String {
    let mut out = Vec::new();
    run(args.iter().copied(), &mut out).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    String::from_utf8(out).unwrap()
}

#[test]
fn train_eval_stats_plotdata_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut metrics = Vec::new();
    let mut evals = Vec::new();
    for seed in ["1", "2"] {
        let out = d.join(format!("run{seed}"));
        let out_s = out.to_str().unwrap();
        run_ok(&[
            "tpw", "train", "--seed", seed, "--episodes", "3", "--trunk", "16,8,8", "--head-hidden", "8", "--out", out_s,
            "--checkpoint-interval", "2",
        ]);
        let ckpt = out.join(format!("pink_v3_checkpoint_seed{seed}_final.tpw"));
        let report = out.join("eval.json");
        let text = run_ok(&[
            "tpw", "eval", ckpt.to_str().unwrap(), "--games", "20", "--seed", "5", "--out", report.to_str().unwrap(),
        ]);
        assert!(text.contains("Wilson"));
        let r: EvalReport = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
        assert_eq!(r.games, 20);
        metrics.push(out.join("metrics.jsonl").to_str().unwrap().to_string());
        evals.push(report.to_str().unwrap().to_string());
    }

    let mut args = vec!["tpw", "stats", "--metrics"];
    args.extend(metrics.iter().map(String::as_str));
    args.push("--eval");
    args.extend(evals.iter().map(String::as_str));
    let text = run_ok(&args);
    assert!(text.contains("\"runs\""));

    let plot = d.join("series.json");
    run_ok(&["tpw", "plotdata", "--metrics", &metrics[0], "--out", plot.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&plot).unwrap()).unwrap();
    assert_eq!(v["ep"].as_array().unwrap().len(), 3);
    assert_eq!(v["ent_pink"].as_array().unwrap().len(), 3);
}

#[test]
fn resume_continues_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let base = ["tpw", "train", "--seed", "4", "--trunk", "16,8,8", "--head-hidden", "8", "--out", out, "--checkpoint-interval", "2"];
    let mut first = base.to_vec();
    first.extend(["--episodes", "2"]);
    run_ok(&first);
    let text = run_ok(&["tpw", "train", "--out", out, "--resume", "--episodes", "4"]);
    assert!(text.contains("\"episodes\":4"), "{text}");
}

#[test]
fn fairness_prints_both_layouts() {
    let text = run_ok(&["tpw", "fairness", "--games", "20", "--seed", "1"]);
    assert!(text.contains("standard:") && text.contains("swapped:"));
}

#[test]
fn errors_are_reported() {
    let mut out = Vec::new();
    assert!(run(["tpw", "eval", "/nonexistent/ckpt.tpw"], &mut out).is_err());
    assert!(run(["tpw", "stats", "--metrics", "/nonexistent.jsonl"], &mut out).is_err());
    assert!(run(["tpw", "train", "--out", "x", "--opponent-random", "2"], &mut out).is_err());
}
