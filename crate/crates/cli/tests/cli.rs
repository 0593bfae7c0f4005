use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hardcore_cli::{run_experiment, validate_config, ExperimentConfig};
use sha2::{Digest, Sha256};

fn hardcore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardcore")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_enumerate() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let g = graph.to_str().unwrap();
    let o = hardcore(&["gen", "--n", "6", "--d", "3", "--seed", "4", "--out", g]);
    assert!(o.status.success(), "{o:?}");
    assert!(fs::read_to_string(&graph).unwrap().starts_with("6 3\n"));

    let o = hardcore(&["enumerate", "profile", "--graph", g, "--lambda", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 8);

    let o = hardcore(&["enumerate", "barrier", "--graph", g, "--lambda", "4.4", "--t", "0"]);
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').take(5).map(|x| x.parse().unwrap()).collect();
    assert!((row[1] + row[2] + row[3] - 1.0).abs() < 1e-12);

    let o = hardcore(&["enumerate", "gap", "--graph", g, "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");

    let o = hardcore(&["dynamics", "run", "--graph", g, "--lambda", "2", "--steps", "100", "--sample-every", "10"]);
    assert_eq!(stdout(&o).lines().next(), Some("step,m,occupancy"));
    assert_eq!(stdout(&o).lines().count(), 12);
}

#[test]
fn tree_grid_shows_the_pitchfork() {
    let o = hardcore(&["tree", "--d", "3", "--lambda-grid", "3.5:5:0.5"]);
    assert!(o.status.success());
    let unique: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(unique, ["true", "true", "false", "false"]);
}

#[test]
fn exit_codes() {
    assert_eq!(hardcore(&["exponents", "verify-polys", "--d", "4"]).status.code(), Some(0));
    assert_eq!(hardcore(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(hardcore(&["tree", "--d", "3", "--lambda-grid", "5:1:1"]).status.code(), Some(2));
    assert_eq!(hardcore(&["enumerate", "profile", "--graph", "/nonexistent", "--lambda", "1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "name = 'p'\nkind = 'phase-diagram'\nd = 3\nlambda = []\n").unwrap();
    let o =
        hardcore(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lambda: grid is empty") && err.contains("seed: missing"), "{err}");
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

const TREND: &str = r#"
name = "trend"
kind = "bottleneck-trend"
d = 3
lambda = [4.4, 0.5]
n = [6, 9]
samples = 12
seed = 5
t = [0, 1]
"#;

const CONDITIONING: &str = r#"
name = "cond"
kind = "conditioning"
d = 3
n = [9]
samples = 40
seed = 8
"#;

#[test]
fn reproducible_across_thread_counts() {
    for text in [TREND, CONDITIONING] {
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (one, four) = (dir.path().join("one"), dir.path().join("four"));
        run_experiment(&cfg, Some(&one), Some(1)).unwrap();
        let outcome = run_experiment(&cfg, Some(&four), Some(4)).unwrap();
        assert_eq!(files_in(&one), files_in(&four), "{}", cfg.name);

        let manifest: serde_json::Value =
            serde_json::from_slice(&fs::read(four.join("manifest.json")).unwrap()).unwrap();
        let listed = manifest["files"].as_array().unwrap();
        assert_eq!(listed.len() + 1, files_in(&four).len());
        for f in listed {
            let body = fs::read(four.join(f["path"].as_str().unwrap())).unwrap();
            assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&body)));
        }
        assert_eq!(manifest["seed"], cfg.seed.unwrap());
        assert!(!outcome.checks.is_empty());
    }
}

#[test]
fn phase_diagram_and_ratio_experiments_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(
        "name='pd'\nkind='phase-diagram'\nd=3\nlambda=[3.5, 3.75, 4.0, 4.25, 4.5, 4.75, 5.0]\nseed=0\n",
    )
    .unwrap();
    let out = run_experiment(&cfg, Some(&dir.path().join("pd")), None).unwrap();
    assert!(out.all_passed(), "{:?}", out.checks);
    let csv = fs::read_to_string(dir.path().join("pd/phase_diagram.csv")).unwrap();
    assert!(csv.starts_with("lambda,lambda_c,p_star,p1,p2,is_unique\n"));

    let cfg = ExperimentConfig::from_toml("name='r'\nkind='ratio-convergence'\nd=3\nn=[30,60,120]\nseed=0\n").unwrap();
    assert!(validate_config(&cfg).is_empty());
    let out = run_experiment(&cfg, Some(&dir.path().join("r")), None).unwrap();
    assert!(out.checks[0].pass, "{:?}", out.checks);
    let summary = fs::read_to_string(dir.path().join("r/summary.md")).unwrap();
    assert!(summary.contains("PASS abs_err strictly decreasing in n"));
}

#[test]
fn experiment_subcommand_reports_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "name='pd'\nkind='phase-diagram'\nd=4\nlambda=[1.0, 2.0, 4.0]\nseed=1\n").unwrap();
    let out = dir.path().join("out");
    let o =
        hardcore(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("PASS p* = 1/d at lambda_c"));
    assert!(out.join("manifest.json").exists() && out.join("summary.md").exists());
}
