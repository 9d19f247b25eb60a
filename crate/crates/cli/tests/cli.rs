use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_annealed-walk"));
    c.env_remove("ANNEALED_WALK_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("annealed-walk-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const ISING: [&str; 6] = ["--density", "ising", "--alpha", "0.5", "--beta", "5"];

fn sample_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["sample"];
    v.extend_from_slice(&ISING);
    v.extend_from_slice(&["--n", "30", "--steps", "500"]);
    v.extend_from_slice(extra);
    v
}

#[test]
fn zero_replicas_prints_header_only() {
    let o = run(&sample_args(&["--replicas", "0"]));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "replica,coord_0\n");
}

#[test]
fn missing_required_flag_is_usage_error() {
    let o = run(&["sample", "--density", "ising", "--n", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--steps"));
}

#[test]
fn unknown_subcommand_and_flag_are_usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&sample_args(&["--bogus", "1"])).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_keys_and_commands_are_rejected() {
    let dir = scratch("badcfg");
    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, r#"{"n": 5, "bogus": 1}"#).unwrap();
    assert_eq!(run(&["sample", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));
    let wrong = dir.join("wrong.json");
    std::fs::write(&wrong, r#"{"command": "anneal", "n": 5}"#).unwrap();
    assert_eq!(run(&["sample", "--config", wrong.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.join("absent.json");
    assert_eq!(run(&["sample", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_config_values() {
    let dir = scratch("override");
    let cfg = dir.join("c.json");
    std::fs::write(
        &cfg,
        r#"{"density": "ising", "alpha": 0.5, "beta": 5, "n": 30, "steps": 500, "replicas": 3, "seed": 4}"#,
    )
    .unwrap();
    let from_config = run(&["sample", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_config.status.code(), Some(0));
    assert_eq!(stdout(&from_config).lines().count(), 4);
    let overridden = run(&["sample", "--config", cfg.to_str().unwrap(), "--replicas", "5"]);
    assert_eq!(stdout(&overridden).lines().count(), 6);
    let direct = run(&sample_args(&["--replicas", "3", "--seed", "4"]));
    assert_eq!(stdout(&direct), stdout(&from_config));
}

#[test]
fn env_seed_is_the_fallback() {
    let flag = run(&sample_args(&["--replicas", "4", "--seed", "77"]));
    let env = bin()
        .args(sample_args(&["--replicas", "4"]))
        .env("ANNEALED_WALK_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(stdout(&flag), stdout(&env));
    let both = bin()
        .args(sample_args(&["--replicas", "4", "--seed", "77"]))
        .env("ANNEALED_WALK_SEED", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&flag), stdout(&both));
    let garbage = bin().args(sample_args(&[])).env("ANNEALED_WALK_SEED", "x").output().unwrap();
    assert_eq!(garbage.status.code(), Some(2));
}

#[test]
fn output_is_independent_of_thread_count() {
    let one = run(&sample_args(&["--replicas", "16", "--seed", "9", "--threads", "1"]));
    let four = run(&sample_args(&["--replicas", "16", "--seed", "9", "--threads", "4"]));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    let other = run(&sample_args(&["--replicas", "16", "--seed", "10"]));
    assert_ne!(stdout(&one), stdout(&other));
}

#[test]
fn persisted_config_replays_the_run() {
    let dir = scratch("replay");
    let out = dir.join("first");
    let mut args = vec!["anneal"];
    args.extend_from_slice(&ISING);
    args.extend_from_slice(&[
        "--n", "60", "--preset", "paper-ising", "--k-max", "6", "--replicas", "5", "--seed", "12", "--out",
    ]);
    args.push(out.to_str().unwrap());
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    for f in ["config.json", "samples.csv", "stages.csv", "histogram.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let stages = std::fs::read_to_string(out.join("stages.csv")).unwrap();
    assert!(stages.starts_with("stage,exponent,resolution,steps,replicas,total_steps\n"));
    assert_eq!(stages.lines().count(), 1 + 4);
    let replay = run(&["anneal", "--config", out.join("config.json").to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(0), "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(stdout(&first), stdout(&replay));
}

#[test]
fn schedule_file_with_explicit_stages() {
    let dir = scratch("schedule");
    let file = dir.join("s.json");
    std::fs::write(
        &file,
        r#"{"density": {"density": "gaussian", "center": [0.3, 0.7], "curvature": 3},
            "d": 2, "n": 20, "stages": [{"K": 2, "N": 4, "T": 200}, {"K": 20, "N": 20, "T": 300}]}"#,
    )
    .unwrap();
    let o = run(&["anneal", "--schedule", file.to_str().unwrap(), "--replicas", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("replica,coord_0,coord_1\n"));
    assert_eq!(text.lines().count(), 4);
    let wrong_d = run(&["anneal", "--schedule", file.to_str().unwrap(), "--d", "3"]);
    assert_eq!(wrong_d.status.code(), Some(2));
}

#[test]
fn unknown_preset_is_usage_error() {
    let mut args = vec!["anneal"];
    args.extend_from_slice(&ISING);
    args.extend_from_slice(&["--n", "20", "--preset", "fastest"]);
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn tabulated_density_rejects_non_finite_values() {
    let dir = scratch("table");
    let good = dir.join("good.txt");
    std::fs::write(&good, "dims 3\n0.0\n1.0\n0.5\n").unwrap();
    let o = run(&["sample", "--density", "table", "--table", good.to_str().unwrap(), "--n", "8", "--steps", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "dims 3\n0.0\nNaN\n0.5\n").unwrap();
    let o = run(&["sample", "--density", "table", "--table", bad.to_str().unwrap(), "--n", "8", "--steps", "50"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trace_file_has_step_header() {
    let dir = scratch("trace");
    let out = dir.join("o");
    let o = run(&sample_args(&["--trace-every", "50", "--out", out.to_str().unwrap()]));
    assert_eq!(o.status.code(), Some(0));
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("step,coord_0\n"));
    assert!(trace.lines().count() >= 10);
    assert_eq!(run(&sample_args(&["--trace-every", "50"])).status.code(), Some(2));
}

#[test]
fn bounds_example_one_report() {
    let o = run(&[
        "bounds",
        "--graph",
        &fixture("example1.graph"),
        "--density",
        &fixture("example1.density"),
        "--eps",
        "0.05",
        "--hitting-bound",
        "671",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,instance,value,bound,pass\n"));
    let supplied = text.lines().find(|l| l.starts_with("schedule_steps_supplied")).unwrap();
    assert!(supplied.contains(",13420,"), "{supplied}");
}

#[test]
fn bounds_without_unique_maximum_fails_checks() {
    let dir = scratch("tie");
    let density = dir.join("tie.density");
    std::fs::write(&density, "0 1\n1 0\n2 1\n").unwrap();
    let o = run(&["bounds", "--graph", &fixture("example1.graph"), "--density", density.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("k_dominance,undefined"));
}

#[test]
fn bounds_bad_graph_is_usage_error() {
    let dir = scratch("badgraph");
    let graph = dir.join("g.txt");
    std::fs::write(&graph, "vertices 3\n0 5 1\n").unwrap();
    let o = run(&["bounds", "--graph", graph.to_str().unwrap(), "--density", &fixture("example1.density")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lda_outputs_and_errors() {
    let dir = scratch("lda");
    let out = dir.join("o");
    let o = run(&[
        "lda", "--toy", "60", "--kappas", "4,16", "--runs", "3", "--seed", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("kappa,run,end_mode,log_posterior\n"));
    assert_eq!(text.lines().count(), 7);
    let hist = std::fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert!(hist.starts_with("kappa,mode,log_posterior,count,fraction\n"));

    let empty = run(&["lda", "--toy", "60", "--runs", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty), "kappa,run,end_mode,log_posterior\n");

    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "0 1 two\n").unwrap();
    assert_eq!(run(&["lda", "--corpus", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["lda"]).status.code(), Some(2));

    let tokens = dir.join("tokens.txt");
    let vocab = dir.join("vocab.txt");
    std::fs::write(&tokens, "apple pear apple\npear plum\n").unwrap();
    std::fs::write(&vocab, "apple\npear\nplum\n").unwrap();
    let raw = run(&[
        "lda", "--corpus", tokens.to_str().unwrap(), "--vocab", vocab.to_str().unwrap(), "--kappas", "2", "--runs", "2",
    ]);
    assert_eq!(raw.status.code(), Some(0), "{}", String::from_utf8_lossy(&raw.stderr));
    assert_eq!(stdout(&raw).lines().count(), 3);
}

#[test]
fn diagnose_negative_control_fails() {
    let o = run(&["diagnose", "--inject-non-lazy", "--n", "12"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,instance,value,bound,pass\n"));
    assert!(text.lines().any(|l| l.contains("non-lazy") && l.ends_with(",false")), "{text}");
}
