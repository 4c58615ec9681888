use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tubal::{load_tensor, save_tensor, RunManifest};
use tubal_core::synth::{gen_low_tubal_rank, sample_mask};
use tubal_core::Mask;

fn tubal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubal")).args(args).env_remove("TUBAL_JOBS").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn info_on_identity() {
    let f = Fixture::new();
    let id = f.path("id.t3b");
    assert_eq!(code(&tubal(&["gen", "identity", "--n", "4", "--n3", "3", "--out", s(&id)])), 0);
    let out = tubal(&["info", s(&id), "--n-target", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("dims: 4x4x3\n"), "{text}");
    assert!(text.contains("tubal-rank: 4\n"));
    assert!(text.contains("multi-rank: 4,4,4\n"));
    assert!(text.contains("tnn: 12\n"));
    assert!(text.contains("pstnn(N=1): 9\n"));
}

#[test]
fn fully_observed_completion() {
    let f = Fixture::new();
    let (input, mask, output) = (f.path("o.t3b"), f.path("m.t3b"), f.path("x.t3b"));
    let a = gen_low_tubal_rank((10, 8, 4), 2, 1).unwrap();
    save_tensor(&a, &input).unwrap();
    tubal::save_mask(&Mask::all(a.dims(), true).unwrap(), &mask).unwrap();
    let out = tubal(&["complete", "--input", s(&input), "--mask", s(&mask), "--n-target", "2", "--output", s(&output)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let x = load_tensor(&output).unwrap();
    assert!(x.inf_dist(&a).unwrap() <= 1e-5);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["rse"].is_null());

    let manifest = RunManifest::read(&RunManifest::path_for(&output)).unwrap();
    assert_eq!(manifest.command, "complete");
    assert_eq!(manifest.config["beta"], 0.05);
    assert_eq!(manifest.config["max_iters"], 500);
    assert_eq!(manifest.outputs, vec![output.clone()]);
}

#[test]
fn usage_errors_exit_one() {
    let f = Fixture::new();
    let out = tubal(&["complete", "--input", "o.t3b", "--mask", "m.t3b"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--n-target"));
    assert_eq!(code(&tubal(&["bench", "tc", "--grid", "size=3", "--out", s(&f.path("g.csv"))])), 1);
    assert_eq!(code(&tubal(&["info", s(&f.path("missing.t3b"))])), 1);
    assert_eq!(code(&tubal(&["--help"])), 0);
}

#[test]
fn dimension_mismatch_exits_one() {
    let f = Fixture::new();
    let (input, mask) = (f.path("o.t3b"), f.path("m.t3b"));
    save_tensor(&gen_low_tubal_rank((5, 5, 3), 1, 1).unwrap(), &input).unwrap();
    tubal::save_mask(&Mask::all((5, 5, 4), true).unwrap(), &mask).unwrap();
    let out = tubal(&["complete", "--input", s(&input), "--mask", s(&mask), "--n-target", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("5x5x4"));
}

#[test]
fn sensitivity_fixture_with_truth_and_replay() {
    let f = Fixture::new();
    let (truth, mask, output, report) = (f.path("a.t3b"), f.path("m.t3b"), f.path("x.t3b"), f.path("r.json"));
    for args in [
        vec!["gen", "lowrank", "--dims", "25x25x30", "--rank", "5", "--seed", "3", "--out", s(&truth)],
        vec!["gen", "mask", "--dims", "25x25x30", "--rate", "0.9", "--seed", "4", "--out", s(&mask)],
    ] {
        assert_eq!(code(&tubal(&args)), 0);
    }
    assert_eq!(load_tensor(&truth).unwrap(), gen_low_tubal_rank((25, 25, 30), 5, 3).unwrap());
    assert_eq!(tubal::load_mask(&mask).unwrap(), sample_mask((25, 25, 30), 0.9, 4).unwrap());

    let args = ["complete", "--input", s(&truth), "--mask", s(&mask), "--n-target", "5", "--seed", "9", "--truth", s(&truth)];
    let mut args: Vec<&str> = args.to_vec();
    args.extend(["--output", s(&output), "--report", s(&report)]);
    assert_eq!(code(&tubal(&args)), 0);
    let r = json(&report);
    assert!(r["rse"].as_f64().unwrap() < 1e-2, "{r}");
    assert!(r["ssim"].as_f64().unwrap() > 0.99);
    assert!(r["iterations"].as_u64().unwrap() >= 1);

    let first = fs::read(&output).unwrap();
    fs::remove_file(&output).unwrap();
    assert_eq!(code(&tubal(&["replay", s(&RunManifest::path_for(&output))])), 0);
    assert_eq!(fs::read(&output).unwrap(), first);
}

#[test]
fn non_convergence_exits_two() {
    let f = Fixture::new();
    let (input, mask) = (f.path("o.t3b"), f.path("m.t3b"));
    save_tensor(&gen_low_tubal_rank((10, 10, 4), 2, 1).unwrap(), &input).unwrap();
    tubal::save_mask(&sample_mask((10, 10, 4), 0.5, 2).unwrap(), &mask).unwrap();
    let out = tubal(&["complete", "--input", s(&input), "--mask", s(&mask), "--n-target", "2", "--max-iters", "2"]);
    assert_eq!(code(&out), 2);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["converged"], false);
    assert_eq!(report["iterations"], 2);
    assert!(f.path("o.completed.t3b").exists());
}

#[test]
fn rpca_clean_input_and_feasibility() {
    let f = Fixture::new();
    let (input, l, e) = (f.path("o.t3b"), f.path("l.t3b"), f.path("e.t3b"));
    let a = gen_low_tubal_rank((15, 12, 6), 2, 5).unwrap();
    save_tensor(&a, &input).unwrap();
    let out = tubal(&[
        "rpca", "--input", s(&input), "--n-target", "2", "--lambda", "10", "--output-l", s(&l), "--output-e", s(&e),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (lt, et) = (load_tensor(&l).unwrap(), load_tensor(&e).unwrap());
    assert!(et.inf_norm() < 10.0 * 1e-5);
    assert!((&lt + &et).inf_dist(&a).unwrap() <= 1e-5);
    assert_eq!(json(&RunManifest::path_for(&l))["config"]["lambda"], 10.0);
}

#[test]
fn rpca_recovers_corrupted_fixture() {
    let f = Fixture::new();
    let (truth, input, support, report) = (f.path("a.t3b"), f.path("o.t3b"), f.path("s.t3b"), f.path("r.json"));
    assert_eq!(code(&tubal(&["gen", "lowrank", "--dims", "40x40x20", "--rank", "2", "--seed", "1", "--out", s(&truth)])), 0);
    let out = tubal(&[
        "gen", "corrupt", "--input", s(&truth), "--sparsity", "0.1", "--low", "-1", "--high", "1", "--seed", "2", "--out",
        s(&input), "--support", s(&support),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(tubal::load_mask(&support).unwrap().count(), 3200);
    let out = tubal(&["rpca", "--input", s(&input), "--n-target", "2", "--truth", s(&truth), "--report", s(&report)]);
    assert_eq!(code(&out), 0);
    assert!(json(&report)["rse"].as_f64().unwrap() < 1e-3);
    let manifest = json(&RunManifest::path_for(&f.path("o.low.t3b")));
    assert!((manifest["config"]["lambda"].as_f64().unwrap() - 1.0 / 800f64.sqrt()).abs() < 1e-15);
}

#[test]
fn metrics_command() {
    let f = Fixture::new();
    let (a, b) = (f.path("a.t3b"), f.path("b.t3b"));
    let t = gen_low_tubal_rank((12, 12, 2), 1, 1).unwrap();
    save_tensor(&t, &a).unwrap();
    save_tensor(&t.scale(2.0), &b).unwrap();
    let out = tubal(&["metrics", "--a", s(&b), "--b", s(&a)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["rse"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let same: Value = serde_json::from_slice(&tubal(&["metrics", "--a", s(&a), "--b", s(&a)]).stdout).unwrap();
    assert_eq!(same["psnr"], "inf");
    assert_eq!(same["ssim"], 1.0);
}

#[test]
fn bench_one_cell_grid_is_saturated_and_reproducible() {
    let f = Fixture::new();
    let grid = "dims=30x30x20;ranks=1;rates=0.9";
    let run = |name: &str, jobs: &str| {
        let out = f.path(name);
        let o = tubal(&["bench", "tc", "--grid", grid, "--trials", "10", "--seed", "5", "--jobs", jobs, "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let first = run("a.csv", "1");
    assert_eq!(fs::read_to_string(&first).unwrap(), "rank\\rate,0.9\n1,1\n");
    assert_eq!(fs::read_to_string(f.path("a.tnn.csv")).unwrap(), "rank\\rate,0.9\n1,1\n");
    assert_eq!(fs::read_to_string(f.path("a.delta.csv")).unwrap(), "rank\\rate,0.9\n1,0\n");
    let second = run("b.csv", "2");
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    assert_eq!(fs::read(f.path("a.tnn.csv")).unwrap(), fs::read(f.path("b.tnn.csv")).unwrap());
    assert_eq!(json(&RunManifest::path_for(&first))["config"]["trials"], 10);
}
