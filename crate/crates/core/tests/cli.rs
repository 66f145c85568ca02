use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use l1pca::cli::{RunManifest, SolveReportJson};
use l1pca::experiments::gaussian_instance;
use l1pca::nalgebra::DMatrix;

fn l1pca(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1pca"))
        .args(args)
        .current_dir(cwd)
        .env_remove("L1PCA_THREADS")
        .output()
        .unwrap()
}

fn write_matrix(path: &Path, m: &DMatrix<f64>) {
    let mut text = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.17e}", m[(r, c)])).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn report(path: &Path) -> SolveReportJson {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn one_row_matrix() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "1,-2,3\n").unwrap();
    let out = l1pca(&["solve", "x.csv", "--solver", "l1bf", "--k", "1"], dir.path());
    assert!(out.status.success());
    let r: SolveReportJson = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.l1_metric, 6.0);
}

#[test]
fn identity_with_every_solver() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("i.csv"), "d1,d2\n1,0\n0,1\n").unwrap();
    for solver in ["l1bf", "fp", "ao", "oracle"] {
        let name = format!("{solver}.json");
        let out = l1pca(&["solve", "i.csv", "--solver", solver, "--out", &name], dir.path());
        assert!(out.status.success(), "{solver}");
        let r = report(&dir.path().join(&name));
        assert_eq!(r.quad_or_nuclear_metric, 1.41421356237);
        assert!(r.wall_time_s.is_none());
        assert!(dir.path().join(format!("{solver}.manifest.json")).exists());
    }
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix(&dir.path().join("x.csv"), &gaussian_instance(4, 12, 4, 3, 0));
    let args = |out: &'static str| {
        ["solve", "x.csv", "--k", "2", "--restarts", "5", "--seed", "11", "--out", out]
    };
    assert!(l1pca(&args("a.json"), dir.path()).status.success());
    assert!(l1pca(&args("b.json"), dir.path()).status.success());
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    let ma = RunManifest::read(&dir.path().join("a.manifest.json")).unwrap();
    let mb = RunManifest::read(&dir.path().join("b.manifest.json")).unwrap();
    assert_eq!(ma.artifacts[0].sha256, mb.artifacts[0].sha256);

    let replay = l1pca(&["replay", "a.manifest.json", "--out", "c.json"], dir.path());
    assert!(replay.status.success(), "{}", String::from_utf8_lossy(&replay.stderr));
    assert_eq!(a, fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"trials": 24, "samples": 10}"#).unwrap();
    for t in ["1", "3"] {
        let out = l1pca(
            &["experiment", "--name", "compare", "--config", "cfg.json", "--out", t, "--threads", t],
            dir.path(),
        );
        assert!(out.status.success());
    }
    for f in ["cdf_l1bf.csv", "cdf_fp.csv", "cdf_ao.csv", "summary.csv"] {
        let a = fs::read(dir.path().join("1").join(f)).unwrap();
        let b = fs::read(dir.path().join("3").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn report_basis_round_trips_orthonormal() {
    let dir = tempfile::tempdir().unwrap();
    write_matrix(&dir.path().join("x.csv"), &gaussian_instance(6, 15, 6, 8, 0));
    for solver in ["l1bf", "fp", "ao"] {
        let out = l1pca(
            &["solve", "x.csv", "--solver", solver, "--k", "3", "--out", "r.json"],
            dir.path(),
        );
        assert!(out.status.success());
        let q = report(&dir.path().join("r.json")).basis_matrix();
        assert_eq!(q.shape(), (6, 3));
        assert!((q.tr_mul(&q) - DMatrix::identity(3, 3)).amax() <= 1e-9, "{solver}");
    }
}

#[test]
fn transpose_flag_reads_sample_rows() {
    let dir = tempfile::tempdir().unwrap();
    let x = gaussian_instance(3, 7, 3, 1, 0);
    write_matrix(&dir.path().join("x.csv"), &x);
    write_matrix(&dir.path().join("xt.csv"), &x.transpose());
    assert!(l1pca(&["solve", "x.csv", "--out", "a.json"], dir.path()).status.success());
    let out = l1pca(&["solve", "xt.csv", "--transpose", "--out", "b.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(
        report(&dir.path().join("a.json")).l1_metric,
        report(&dir.path().join("b.json")).l1_metric
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.csv"), "1,2\n3\n").unwrap();
    fs::write(p.join("i.csv"), "1,0\n0,1\n").unwrap();
    write_matrix(&p.join("wide.csv"), &gaussian_instance(3, 12, 3, 0, 0));

    let code = |args: &[&str]| l1pca(args, p).status.code().unwrap();
    assert_eq!(code(&["solve", "bad.csv"]), 2);
    assert_eq!(code(&["solve", "missing.csv"]), 2);
    assert_eq!(code(&["solve", "i.csv", "--solver", "sdp"]), 2);
    assert_eq!(code(&["solve", "i.csv", "--k", "3"]), 3);
    assert_eq!(code(&["solve", "wide.csv", "--solver", "oracle", "--k", "2"]), 3);
    assert_eq!(code(&["solve", "i.csv", "--restarts", "0"]), 3);
    assert_eq!(code(&["experiment", "--name", "video", "--out", "o"]), 2);
    assert_eq!(code(&["--help"]), 0);

    let out = l1pca(&["solve", "wide.csv", "--solver", "oracle", "--k", "2"], p);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("guard") && msg.contains("N = 12"), "{msg}");
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("cfg.json"), r#"{"trials": 20, "n_max": 5}"#).unwrap();
    let out = l1pca(&["experiment", "--name", "sets", "--config", "cfg.json", "--out", "s"], p);
    assert!(out.status.success());
    let manifest = p.join("s/manifest.json");
    let mut m = RunManifest::read(&manifest).unwrap();
    m.artifacts[0].sha256 = "0".repeat(64);
    m.write(&manifest).unwrap();
    let out = l1pca(&["replay", "s/manifest.json", "--out", "s2"], p);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn experiment_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = |name: &str, cfg: Option<&str>, out: &str| {
        let mut args = vec!["experiment", "--name", name, "--out", out];
        let path = format!("{out}.json");
        if let Some(cfg) = cfg {
            fs::write(p.join(&path), cfg).unwrap();
            args.extend(["--config", &path]);
        }
        l1pca(&args, p).status.code().unwrap()
    };

    assert_eq!(run("sets", Some(r#"{"dim": 2, "n_min": 2, "n_max": 7, "trials": 100}"#), "sets"), 0);
    let sets = fs::read_to_string(p.join("sets/sets.csv")).unwrap();
    let lines: Vec<&str> = sets.lines().collect();
    assert_eq!(lines[0], "n,mean_phi,mean_omega,mean_b,violations");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.ends_with(",0")));

    assert_eq!(run("compare", Some(r#"{"dim": 4, "samples": 16, "k": 1, "trials": 100}"#), "cmp"), 0);
    for f in ["cdf_l1bf.csv", "cdf_fp.csv", "cdf_ao.csv", "summary.csv"] {
        let text = fs::read_to_string(p.join("cmp").join(f)).unwrap();
        assert!(text.lines().count() > 1, "{f}");
    }
    let cdf = fs::read_to_string(p.join("cmp/cdf_l1bf.csv")).unwrap();
    assert!(cdf.starts_with("delta,cum_prob\n"), "{cdf}");
    assert!(cdf.trim_end().ends_with(",1"));

    assert_eq!(run("linefit", None, "lf"), 0);
    let mut files: Vec<String> = fs::read_dir(p.join("lf"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(
        files,
        ["linefit_angles.csv", "linefit_lines.csv", "linefit_points.csv", "manifest.json"]
    );

    assert_eq!(run("classify", Some(r#"{"splits": 30, "mislabeled": [2]}"#), "cls"), 0);
    assert!(p.join("cls/roc_l1_p2.csv").exists());
    assert!(p.join("cls/roc_l2_p2.csv").exists());

    assert_eq!(run("initcdf", Some(r#"{"trials": 50}"#), "init"), 0);
    assert!(p.join("init/initcdf_flips.csv").exists());

    assert_eq!(run("sets", Some(r#"{"trails": 5}"#), "typo"), 2);
}
