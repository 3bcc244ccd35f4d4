use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "[synthetic]\nn_users = 20\nn_communities = 2\nn_base_stations = 2\nhorizon = 86400\nseed = 5\n";

fn sndn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sndn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sndn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: PathBuf) -> String {
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A temp dir holding the small synthetic trace under `trace/`.
fn small_trace() -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, SMALL).unwrap();
    let trace = dir.path().join("trace");
    ok(&["gen-trace", "--config", p(&spec), "--out", p(&trace)]);
    (dir, trace)
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_trace_round_trips_through_validate() {
    let (dir, trace) = small_trace();
    let hash = |text: &str| text.split_whitespace().last().unwrap().to_string();
    let spec = dir.path().join("spec.toml");
    let again = dir.path().join("again");
    let written = ok(&["gen-trace", "--config", p(&spec), "--out", p(&again)]);
    let checked = ok(&["validate", "--trace-dir", p(&again)]);
    let first_line = checked.lines().next().unwrap();
    assert!(first_line.starts_with(&format!("trace {}:", hash(&written))), "{first_line}");
    assert!(first_line.contains("22 nodes (2 stations)"), "{first_line}");
    assert_eq!(read(trace.join("contacts.csv")), read(again.join("contacts.csv")));

    let other = dir.path().join("other");
    ok(&["gen-trace", "--config", p(&spec), "--out", p(&other), "--seed", "6"]);
    assert_ne!(read(trace.join("contacts.csv")), read(other.join("contacts.csv")));
}

#[test]
fn small_spec_has_twenty_users() {
    let (_dir, trace) = small_trace();
    let stations = read(trace.join("stations.txt"));
    let profiles = read(trace.join("profiles.csv"));
    let users: std::collections::BTreeSet<&str> =
        profiles.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(users.len(), 20);
    assert_eq!(stations.lines().count(), 2);
}

#[test]
fn run_writes_its_outputs() {
    let (dir, trace) = small_trace();
    let cfg = write_config(dir.path(), "run.toml", "[engine]\nscheme = \"sndn\"\nwarmup = 21600\n");
    let out = dir.path().join("out");
    let stdout = ok(&["run", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&out)]);
    assert!(stdout.contains("delivery ratio"));
    for f in ["metrics.csv", "events.csv", "requests.csv", "config.toml"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let metrics = read(out.join("metrics.csv"));
    assert_eq!(metrics.lines().count(), 2);
    assert!(metrics.lines().nth(1).unwrap().starts_with("sndn,"));
}

#[test]
fn missing_trace_exits_with_two_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nowhere");
    let out = sndn(&["run", "--trace-dir", p(&missing), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nowhere"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let (dir, trace) = small_trace();
    let cfg = write_config(dir.path(), "bad.toml", "[engine]\nttll = 5\n");
    let out = sndn(&["run", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ttll"));
}

#[test]
fn metrics_match_the_golden_file() {
    let (dir, trace) = small_trace();
    let cfg = write_config(dir.path(), "run.toml", "[engine]\nscheme = \"sndn\"\nwarmup = 21600\nseed = 11\n");
    let out = dir.path().join("out");
    ok(&["run", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&out)]);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_metrics.csv");
    assert_eq!(read(out.join("metrics.csv")), read(golden));
}

const SWEEP: &str = "[engine]\nwarmup = 21600\nseed = 3\n\n[sweep]\nscheme = [\"direct\", \"sndn\", \"flood\"]\nttl = [3600, 7200]\nruns = 2\n";

#[test]
fn sweep_rows_and_thread_count_invariance() {
    let (dir, trace) = small_trace();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    ok(&["sweep", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&one), "--parallelism", "1"]);
    ok(&["sweep", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&many), "--parallelism", "8"]);
    let a = read(one.join("metrics.csv"));
    assert_eq!(a, read(many.join("metrics.csv")));
    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|r| r.ends_with(",ok")).count(), 12);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",aggregate")).count(), 6);
    assert_eq!(std::fs::read_dir(one.join("configs")).unwrap().count(), 12);
}

#[test]
fn a_sweep_row_is_reproduced_from_its_config_file() {
    let (dir, trace) = small_trace();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("sweep");
    ok(&["sweep", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&out)]);
    let metrics = read(out.join("metrics.csv"));
    let row = metrics.lines().nth(3).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    let hash = cols[12];
    let single = dir.path().join("single");
    let run_cfg = out.join("configs").join(format!("{hash}.toml"));
    ok(&["run", "--config", p(&run_cfg), "--trace-dir", p(&trace), "--out", p(&single)]);
    let again = read(single.join("metrics.csv"));
    assert_eq!(format!("{},ok", again.lines().nth(1).unwrap()), row);
}

#[test]
fn alpha_sweep_gives_one_aggregate_per_value() {
    let (dir, trace) = small_trace();
    let cfg = write_config(
        dir.path(),
        "alpha.toml",
        "[engine]\nscheme = \"sndn\"\nwarmup = 21600\n\n[sweep]\nalpha = [0.0, 0.5, 1.0]\nruns = 2\n",
    );
    let out = dir.path().join("alpha");
    ok(&["sweep", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&out)]);
    let metrics = read(out.join("metrics.csv"));
    let alphas: Vec<&str> = metrics
        .lines()
        .filter(|r| r.ends_with(",aggregate"))
        .map(|r| r.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(alphas, ["0", "0.5", "1"]);
}

#[test]
fn direct_delivers_on_a_hand_written_chain() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("chain");
    std::fs::create_dir(&trace).unwrap();
    std::fs::write(
        trace.join("contacts.csv"),
        "a,b,start,end\n# horizon: 20000\n2,9,0,50\n0,1,100,200\n1,2,300,400\n0,1,500,600\n0,2,5000,5100\n1,2,8000,8100\n",
    )
    .unwrap();
    std::fs::write(trace.join("stations.txt"), "9\n").unwrap();
    std::fs::write(trace.join("catalog.txt"), "a\n").unwrap();
    std::fs::write(trace.join("profiles.csv"), "user,component,weight\n0,a,1\n1,a,1\n2,a,1\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "direct.toml",
        "[engine]\nscheme = \"direct\"\nwarmup = 0\ndirect_serve_prob = 1.0\nrequest_interval = 1000\nttl = 20000\n",
    );
    let out = dir.path().join("out");
    ok(&["run", "--config", p(&cfg), "--trace-dir", p(&trace), "--out", p(&out)]);
    let metrics = read(out.join("metrics.csv"));
    let ratio: f64 = metrics.lines().nth(1).unwrap().split(',').nth(6).unwrap().parse().unwrap();
    assert!(ratio > 0.0, "{metrics}");
}
