use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use navq_core::navgraph::NavGraph;
use navq_core::qoracle::{self, QOracleConfig};
use navq_core::worldgen;
use serde_json::Value;

const SMALL: &str = r#"{
  "n_worlds": 4,
  "n_holdout": 1,
  "q_samples": 300,
  "q_val_samples": 60,
  "qmodel": { "epochs": 4, "hidden": [16] },
  "s2": { "samples": 200, "val_samples": 50, "train": { "epochs": 3, "hidden": [8] } },
  "episodes": 20,
  "calibration_episodes": 10,
  "stop_tau_grid": [0.1, 0.3]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_navq")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "navq {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Work {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Work {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        fs::write(root.join("small.json"), SMALL).unwrap();
        Work { _dir: dir, root }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// gen-worlds through train-s2 into `prefix_*` directories.
    fn upstream(&self, prefix: &str, kind: &str) {
        let cfg = self.path("small.json");
        let p = |n: &str| self.path(&format!("{prefix}_{n}"));
        ok(&["gen-worlds", "--config", s(&cfg), "--seed", "3", "--kind", kind, "--nodes", "25", "--out", s(&p("worlds"))]);
        ok(&["build-qdata", "--worlds", s(&p("worlds")), "--out", s(&p("qdata"))]);
        ok(&["train-qmodel", "--worlds", s(&p("worlds")), "--qdata", s(&p("qdata")), "--out", s(&p("qmodel"))]);
        ok(&["train-s2", "--worlds", s(&p("worlds")), "--qmodel", s(&p("qmodel")), "--out", s(&p("s2"))]);
    }
}

fn load_worlds(dir: &Path) -> (Vec<String>, Vec<NavGraph>) {
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest["worlds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| {
            let g = worldgen::load_graph(&dir.join(w["file"].as_str().unwrap())).unwrap();
            (w["name"].as_str().unwrap().to_string(), g)
        })
        .unzip()
}

#[test]
fn gen_worlds_writes_files_and_repeats_byte_for_byte() {
    let w = Work::new();
    for out in ["a", "b"] {
        ok(&["gen-worlds", "--kind", "grid", "--n", "10", "--seed", "1", "--out", s(&w.path(out))]);
    }
    let mut names: Vec<_> = fs::read_dir(w.path("a")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 11);
    assert!(names.contains(&"manifest.json".to_string()));
    for n in &names {
        assert_eq!(fs::read(w.path("a").join(n)).unwrap(), fs::read(w.path("b").join(n)).unwrap(), "{n}");
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(w.path("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["worlds"].as_array().unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_nonzero() {
    let w = Work::new();
    let out = run(&["gen-worlds", "--kind", "hexagon", "--out", s(&w.path("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hexagon"));
    let out = run(&["ablate", "--gammas", "", "--out", s(&w.path("x"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["ablate", "--out", s(&w.path("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!w.path("x").exists());
}

#[test]
fn missing_manifest_is_a_one_line_error_without_output() {
    let w = Work::new();
    fs::create_dir(w.path("empty")).unwrap();
    let out = run(&["build-qdata", "--worlds", s(&w.path("empty")), "--out", s(&w.path("q"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("navq: missing manifest"), "{err}");
    assert!(!w.path("q").exists());
}

#[test]
fn qdata_records_revalidate_against_the_oracle() {
    let w = Work::new();
    ok(&["gen-worlds", "--n", "10", "--seed", "2", "--out", s(&w.path("worlds"))]);
    ok(&["build-qdata", "--worlds", s(&w.path("worlds")), "--n", "1000", "--val-n", "100", "--out", s(&w.path("q"))]);
    let (names, graphs) = load_worlds(&w.path("worlds"));
    let train = qoracle::read_samples_jsonl(&w.path("q/train.jsonl"), &graphs, &names).unwrap();
    assert_eq!(train.len(), 1000);
    assert_eq!(fs::read_to_string(w.path("q/train.jsonl")).unwrap().lines().count(), 1000);
    let cfg = QOracleConfig::default();
    for r in &train {
        assert!(r.world < 8, "training records come from training worlds");
        let q = qoracle::gt_qfeature(&graphs[r.world], r.trajectory.tail(), r.candidate, &cfg).unwrap();
        assert_eq!(q.values, r.target);
    }
    let val = qoracle::read_samples_jsonl(&w.path("q/val.jsonl"), &graphs, &names).unwrap();
    assert!(val.iter().all(|r| r.world >= 8));
    let stats: Value = serde_json::from_str(&fs::read_to_string(w.path("q/stats.json")).unwrap()).unwrap();
    assert_eq!(stats["train"], 1000);
    assert_eq!(stats["gamma"], 0.5);
    let m = stats["mean_traj_len"].as_f64().unwrap();
    assert!((1.0..=8.0).contains(&m));

    ok(&["build-qdata", "--worlds", s(&w.path("worlds")), "--n", "200", "--gamma", "0", "--out", s(&w.path("q0"))]);
    for r in qoracle::read_samples_jsonl(&w.path("q0/train.jsonl"), &graphs, &names).unwrap() {
        assert_eq!(r.target, graphs[r.world].feature(r.candidate));
    }
}

#[test]
fn training_outputs_are_deterministic_with_one_loss_row_per_epoch() {
    let w = Work::new();
    w.upstream("a", "grid");
    let cfg = w.path("small.json");
    ok(&["train-qmodel", "--config", s(&cfg), "--seed", "3", "--worlds", s(&w.path("a_worlds")), "--qdata", s(&w.path("a_qdata")), "--out", s(&w.path("again"))]);
    assert_eq!(fs::read(w.path("a_qmodel/qmodel.json")).unwrap(), fs::read(w.path("again/qmodel.json")).unwrap());
    let loss = fs::read_to_string(w.path("a_qmodel/loss.csv")).unwrap();
    let mut lines = loss.lines();
    assert_eq!(lines.next(), Some("epoch,train_mse,val_mse"));
    assert_eq!(lines.count(), 4);
    for head in ["history", "gt", "learned"] {
        let curve = fs::read_to_string(w.path(&format!("a_s2/{head}_loss.csv"))).unwrap();
        assert_eq!(curve.lines().count(), 1 + 3, "{head}");
    }
}

#[test]
fn run_bench_reports_every_agent_and_repeats() {
    let w = Work::new();
    w.upstream("a", "grid");
    let bench = |out: &str| {
        ok(&[
            "run-bench",
            "--worlds",
            s(&w.path("a_worlds")),
            "--qmodel",
            s(&w.path("a_qmodel")),
            "--s2",
            s(&w.path("a_s2")),
            "--agents",
            "random,history,gtq,learnedq,expert",
            "--out",
            s(&w.path(out)),
        ])
    };
    let stdout = bench("b1");
    bench("b2");
    let report = fs::read_to_string(w.path("b1/report.csv")).unwrap();
    assert_eq!(stdout, report);
    let agents: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(agents, ["random", "history", "gtq", "learnedq", "expert"]);
    for f in ["report.csv", "episodes.jsonl", "manifest.json", "histogram_gtq.csv"] {
        assert_eq!(fs::read(w.path("b1").join(f)).unwrap(), fs::read(w.path("b2").join(f)).unwrap(), "{f}");
    }
    let hist = fs::read_to_string(w.path("b1/histogram_expert.csv")).unwrap();
    assert!(hist.starts_with("bin,count\n"));
    let last = hist.lines().last().unwrap();
    assert_eq!(last, "identical,20");
}

#[test]
fn expert_is_perfect_on_trees() {
    let w = Work::new();
    w.upstream("t", "tree");
    ok(&[
        "run-bench",
        "--worlds",
        s(&w.path("t_worlds")),
        "--qmodel",
        s(&w.path("t_qmodel")),
        "--s2",
        s(&w.path("t_s2")),
        "--agents",
        "expert",
        "--out",
        s(&w.path("b")),
    ]);
    let report = fs::read_to_string(w.path("b/report.csv")).unwrap();
    let f: Vec<&str> = report.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((f[0], f[4], f[6]), ("expert", "1", "1"));
}

#[test]
fn unknown_agent_is_rejected() {
    let out = run(&["run-bench", "--worlds", "w", "--qmodel", "q", "--s2", "s", "--agents", "oracle", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown agent"));
}

#[test]
fn export_supports_on_fixtures_and_worlds() {
    let w = Work::new();
    ok(&["export-supports", "--fixture", "star", "--origin", "0", "--out", s(&w.path("star.json"))]);
    let v: Value = serde_json::from_str(&fs::read_to_string(w.path("star.json")).unwrap()).unwrap();
    for c in v["candidates"].as_array().unwrap() {
        let nodes = c["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0]["id"], c["candidate"]);
        assert_eq!(nodes[0]["p"], 1.0);
    }

    ok(&["gen-worlds", "--n", "2", "--holdout", "1", "--seed", "4", "--out", s(&w.path("worlds"))]);
    let graph = w.path("worlds/world_000.json");
    ok(&["export-supports", "--graph", s(&graph), "--origin", "0", "--gamma", "0.7", "--out", s(&w.path("grid.json"))]);
    let g = worldgen::load_graph(&graph).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(w.path("grid.json")).unwrap()).unwrap();
    let mut owners = vec![0; g.len()];
    for c in v["candidates"].as_array().unwrap() {
        for n in c["nodes"].as_array().unwrap() {
            owners[n["id"].as_u64().unwrap() as usize] += 1;
            let t = n["t"].as_i64().unwrap() as i32;
            assert_eq!(n["w"].as_f64().unwrap(), 0.7f64.powi(t));
        }
    }
    assert_eq!(owners[0], 0);
    assert!(owners[1..].iter().all(|&k| k == 1));

    let out = run(&["export-supports", "--fixture", "star", "--origin", "9", "--out", s(&w.path("bad.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!w.path("bad.json").exists());
}

#[test]
fn ablate_emits_one_row_per_gamma() {
    let w = Work::new();
    let cfg = w.path("small.json");
    ok(&["ablate", "--config", s(&cfg), "--gammas", "0,0.5", "--policy", "--out", s(&w.path("ab"))]);
    let table = fs::read_to_string(w.path("ab/gamma.csv")).unwrap();
    let gammas: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(gammas, ["0", "0.5"]);
    let policy = fs::read_to_string(w.path("ab/policy.csv")).unwrap();
    let modes: Vec<&str> = policy.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(modes, ["shortest-canonical", "uniform-random"]);
    assert!(w.path("ab/gamma/cell_1/episodes.jsonl").exists());
    assert!(w.path("ab/manifest.json").exists());
}

#[test]
fn verify_quick_passes() {
    let out = ok(&["verify", "--quick"]);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS ")).count(), 5, "{out}");
}
