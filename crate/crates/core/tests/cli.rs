use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_v2v-offload"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Second CSV line, split into fields.
fn first_row(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn simulate_departure_with_filter() {
    let cfg = scenario("departure.toml");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--solver",
        "hgsa",
        "--filter",
        "on",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row = first_row(&o);
    assert_eq!(row[5], "6");
    assert_eq!(row[7], "0");
}

#[test]
fn brute_force_no_worse_than_hgsa() {
    let cfg = scenario("small.toml");
    let ms = |solver| {
        let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--solver", solver]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        first_row(&o)[4].parse::<f64>().unwrap()
    };
    assert!(ms("brute") <= ms("hgsa"));
}

#[test]
fn gen_trace_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("t{i}.csv"))).collect();
    for p in &paths {
        let o = run(&[
            "gen-trace",
            "--vehicles",
            "20",
            "--seed",
            "7",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(a.starts_with(b"time_s,vehicle_id,x_m,y_m,speed_mps\n"));
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn generated_trace_feeds_back_in() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let common = [
        "--vehicles",
        "6",
        "--subtasks",
        "20",
        "--seed",
        "3",
        "--set",
        "horizon=200",
    ];
    let o = bin()
        .arg("gen-trace")
        .args(common)
        .args(["-o", trace.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let generated = bin().arg("simulate").args(common).output().unwrap();
    let loaded = bin()
        .arg("simulate")
        .args(common)
        .args(["--set", &format!("trace=\"{}\"", trace.display())])
        .output()
        .unwrap();
    assert!(loaded.status.success(), "{}", String::from_utf8_lossy(&loaded.stderr));
    assert_eq!(first_row(&generated)[5], first_row(&loaded)[5]);
}

#[test]
fn flags_override_set_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "rng_seed = 3\ncomm_range = 120.0\n[fleet]\nn_vehicles = 6\nn_subtasks = 12\n",
    )
    .unwrap();
    let print = |extra: &[&str]| {
        let o = bin()
            .args(["simulate", "--print-config", "--config", cfg.to_str().unwrap()])
            .args(extra)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: toml::Table = stdout(&o).parse().unwrap();
        v
    };
    let base = print(&[]);
    assert_eq!(base["rng_seed"].as_integer(), Some(3));
    assert_eq!(base["comm_range"].as_float(), Some(120.0));
    assert_eq!(base["vehicles"].as_array().unwrap().len(), 6);

    let set = print(&["--set", "rng_seed=4", "--set", "comm_range=99.5"]);
    assert_eq!(set["rng_seed"].as_integer(), Some(4));
    assert_eq!(set["comm_range"].as_float(), Some(99.5));

    let flag = print(&["--set", "rng_seed=4", "--seed", "5", "--vehicles", "8"]);
    assert_eq!(flag["rng_seed"].as_integer(), Some(5));
    assert_eq!(flag["vehicles"].as_array().unwrap().len(), 8);
}

#[test]
fn printed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let printed = dir.path().join("resolved.toml");
    let args = [
        "--vehicles",
        "5",
        "--subtasks",
        "16",
        "--seed",
        "12",
        "--set",
        "horizon=200",
    ];
    let o = bin()
        .args(["simulate", "--print-config", "-o", printed.to_str().unwrap()])
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success());
    let direct = bin().arg("simulate").args(args).output().unwrap();
    let replay = run(&["simulate", "--config", printed.to_str().unwrap()]);
    assert_eq!(stdout(&direct), stdout(&replay));
}

#[test]
fn exit_codes() {
    let missing = run(&["simulate", "--config", "/nonexistent/x.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/x.toml"));

    let unknown_key = run(&["simulate", "--set", "channel.bogus=1"]);
    assert_eq!(unknown_key.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown_key.stderr).contains("bogus"));

    let invalid = run(&["simulate", "--set", "comm_range=-5"]);
    assert_eq!(invalid.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("comm_range"));

    assert_eq!(run(&["simulate", "--no-such-flag"]).status.code(), Some(1));

    let cfg = scenario("departure.toml");
    let path = cfg.to_str().unwrap();
    let o = run(&["simulate", "--config", path, "--set", "tasks.0.deadline=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stdout(&o).is_empty());
    let o = run(&["solve", "--config", path, "--set", "tasks.0.deadline=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--config", path, "--set", "tasks.5.deadline=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tasks.5.deadline"));
}

#[test]
fn self_test_needs_no_files() {
    let o = bin()
        .arg("self-test")
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{text}");
}

#[test]
fn sweep_writes_all_cells() {
    let o = run(&[
        "sweep",
        "--axis",
        "vehicles",
        "--values",
        "4-5",
        "--solvers",
        "hgsa,df",
        "--filters",
        "on,off",
        "--reps",
        "2",
        "--subtasks",
        "10",
        "--set",
        "horizon=120",
        "--set",
        "fleet.task_subtasks_min=5",
        "--set",
        "fleet.task_subtasks_max=5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2 * 2 * 2);
}
