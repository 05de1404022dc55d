//! Drives the `plap` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn plap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plap")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn config(out: &Path, body: &str) -> String {
    format!(
        "# small Dirichlet problem\n\
         problem = dirichlet\n\
         domain.min = -0.5\n\
         domain.max = 0.5\n\
         kernel.family = step\n\
         kernel.radius = 0.25\n\
         grid.half_width = 1\n\
         grid.h = 0.0625\n\
         time.final = 0.5\n\
         time.snapshots = 3\n\
         output.dir = {}\n\
         {body}\n",
        out.display()
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, config(&dir.join(format!("out_{name}")), body)).unwrap();
    path
}

const PROXIMAL: &str = "p = 2.5\nstepper.scheme = proximal\nstepper.dt_max = 0.05\n\
                        datum = random\ndatum.support = 0.5\ndatum.lower = -1\nseed = 4\nstepper.evi_probes = 3";

#[test]
fn run_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "ind.cfg", "p = 3\nstepper.scheme = explicit\nstepper.dt_max = 0.01\ndatum = indicator\ndatum.lower = -0.25\ndatum.upper = 0.25");
    let o = plap(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    let out = dir.path().join("out_ind.cfg");
    for f in ["snapshot_0000.csv", "snapshot_0002.meta", "series.csv", "final.csv", "final.meta", "report.csv", "summary.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.starts_with("check,theorem,status,residual,tolerance\n"));
    assert!(report.contains("\nsmoothing,"));
    assert!(text(&o.stdout).contains("checks, 0 failed"));
}

#[test]
fn zero_datum_gives_zero_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "zero.cfg", "p = 3\nstepper.scheme = explicit\nstepper.dt_max = 0.05\ndatum = zero");
    let o = plap(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    let out = dir.path().join("out_zero.cfg");
    for k in 0..3 {
        let csv = fs::read_to_string(out.join(format!("snapshot_{k:04}.csv"))).unwrap();
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")), "{csv}");
    }
}

#[test]
fn identical_configs_give_identical_series() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.cfg", PROXIMAL);
    let b = write_config(dir.path(), "b.cfg", PROXIMAL);
    for p in [&a, &b] {
        let o = plap(&["run", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    }
    let sa = fs::read(dir.path().join("out_a.cfg/series.csv")).unwrap();
    let sb = fs::read(dir.path().join("out_b.cfg/series.csv")).unwrap();
    assert!(sa.len() > 100);
    assert_eq!(sa, sb);
}

#[test]
fn config_errors_exit_two_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "bad.cfg", "p = 1.5\nstepper.scheme = explicit\nstepper.dt_max = 0.01\ndatum = zero\nkernel.colour = red");
    let o = plap(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = text(&o.stderr);
    assert!(err.contains("explicit scheme needs p >= 2"), "{err}");
    assert!(err.contains("unknown key 'kernel.colour'"), "{err}");
    assert!(!dir.path().join("out_bad.cfg").exists());

    let o = plap(&["run", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&plap(&["frobnicate"])), 2);
}

#[test]
fn sweep_runs_every_match() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "s1.cfg", PROXIMAL);
    write_config(dir.path(), "s2.cfg", "p = 2\nstepper.scheme = explicit\nstepper.dt_max = 0.01\ndatum = bump\ndatum.radius = 0.4");
    let pattern = dir.path().join("s*.cfg");
    let o = Command::new(env!("CARGO_BIN_EXE_plap"))
        .args(["sweep", pattern.to_str().unwrap()])
        .env("PLAP_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    let stdout = text(&o.stdout);
    assert!(stdout.contains("PASS s1") && stdout.contains("PASS s2"), "{stdout}");
    assert!(dir.path().join("out_s1.cfg/series.csv").exists());
    assert!(dir.path().join("out_s2.cfg/series.csv").exists());

    let o = Command::new(env!("CARGO_BIN_EXE_plap"))
        .args(["sweep", pattern.to_str().unwrap()])
        .env("PLAP_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(code(&plap(&["sweep", dir.path().join("none*.cfg").to_str().unwrap()])), 2);
}

#[test]
fn sweep_rejects_shared_output_directories() {
    let dir = tempfile::tempdir().unwrap();
    let shared = dir.path().join("same");
    for name in ["x1.cfg", "x2.cfg"] {
        fs::write(dir.path().join(name), config(&shared, PROXIMAL)).unwrap();
    }
    let o = plap(&["sweep", dir.path().join("x*.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("share output directory"));
    assert!(!shared.exists());
}

#[test]
fn verify_invariants_is_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.csv");
    let o = plap(&["verify", "invariants", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let csv = fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("check,theorem,status,residual,tolerance"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 7);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("pass")), "{csv}");
    assert!(text(&o.stderr).contains("seed: 3"));

    assert_eq!(code(&plap(&["verify", "everything"])), 2);
}

#[test]
fn figures_reproduce_both_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    let o = plap(&["figures", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    assert!(text(&o.stdout).contains("figure1: PASS"));
    assert!(text(&o.stdout).contains("figure2: PASS"));
    for f in ["figure1/snapshot_0008.csv", "figure2/report.csv", "plot.gp"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
