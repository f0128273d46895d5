use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rmtlab::heavy::tail_index_estimate;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rmtlab"));
    c.env_remove("RMT_DEFAULT_SEED");
    c
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("rmtlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn sample_writes_rows_and_is_byte_identical() {
    let d = scratch("sample");
    for out in ["a", "b"] {
        let o = run(&["sample", "--ensemble", "ginibre-complex", "--n", "4", "--seed", "1", "--output", out], &d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(d.join("a/spectrum.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("re,im"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(fs::read_to_string(d.join("a/singular.csv")).unwrap().lines().next(), Some("s"));
    for f in ["spectrum.csv", "singular.csv"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap());
    }
}

#[test]
fn replay_reproduces_sample() {
    let d = scratch("replay");
    let o = run(&["sample", "--ensemble", "bernoulli", "--n", "30", "--seed", "9", "--output", "out"], &d);
    assert!(o.status.success());
    let first = fs::read(d.join("out/spectrum.csv")).unwrap();
    let config = fs::read_to_string(d.join("out/sample.config.json")).unwrap();
    assert!(config.contains("\"seed\": 9") && config.contains("\"scale\""));
    fs::remove_file(d.join("out/spectrum.csv")).unwrap();
    let o = run(&["replay", "--config", "out/sample.config.json"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(d.join("out/spectrum.csv")).unwrap(), first);
}

#[test]
fn thread_count_does_not_change_output() {
    let d = scratch("threads");
    for (t, out) in [("1", "t1"), ("3", "t3")] {
        let o = run(&["--threads", t, "sample", "--ensemble", "ginibre-real", "--n", "60", "--seed", "5", "--output", out], &d);
        assert!(o.status.success());
    }
    for f in ["spectrum.csv", "singular.csv"] {
        assert_eq!(fs::read(d.join("t1").join(f)).unwrap(), fs::read(d.join("t3").join(f)).unwrap());
    }
}

#[test]
fn env_seed_used_only_without_flag() {
    let d = scratch("envseed");
    let mut c = bin();
    assert!(c.args(["sample", "--ensemble", "ginibre-complex", "--n", "5", "--output", "env"]).env("RMT_DEFAULT_SEED", "4").current_dir(&d).status().unwrap().success());
    assert!(run(&["sample", "--ensemble", "ginibre-complex", "--n", "5", "--seed", "4", "--output", "flag"], &d).status.success());
    assert!(run(&["sample", "--ensemble", "ginibre-complex", "--n", "5", "--output", "zero"], &d).status.success());
    let read = |s: &str| fs::read(d.join(s).join("spectrum.csv")).unwrap();
    assert_eq!(read("env"), read("flag"));
    assert_ne!(read("env"), read("zero"));
}

#[test]
fn heavy_sample_tail_index() {
    let d = scratch("heavy");
    let o = run(&["sample", "--ensemble", "heavy", "--alpha", "1.0", "--n", "1000", "--output", "h"], &d);
    assert!(o.status.success());
    let s = column(&d.join("h/singular.csv"), "s");
    assert_eq!(s.len(), 1000);
    let a = tail_index_estimate(&s, 0.05).unwrap();
    assert!((a - 1.0).abs() < 0.2, "hill {a}");
}

#[test]
fn usage_and_io_exit_codes() {
    let d = scratch("codes");
    assert_eq!(run(&["sample", "--ensemble", "gue", "--n", "4"], &d).status.code(), Some(2));
    assert_eq!(run(&["sample", "--ensemble", "ginibre-complex", "--n", "0"], &d).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nonexistent"], &d).status.code(), Some(2));
    assert_eq!(run(&["law", "--name", "semicircle"], &d).status.code(), Some(2));
    let blocker = d.join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run(&["sample", "--ensemble", "ginibre-complex", "--n", "4", "--output", "file/sub"], &d);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn law_quarter_circular_table() {
    let d = scratch("qc");
    assert!(run(&["law", "--name", "quarter-circular", "--grid", "0:2:0.01", "--output", "qc.csv"], &d).status.success());
    let x = column(&d.join("qc.csv"), "x");
    let f = column(&d.join("qc.csv"), "density");
    assert_eq!(x.len(), 201);
    assert!((f[0] - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    for (xi, fi) in x.iter().zip(&f) {
        let exact = (4.0 - xi * xi).max(0.0).sqrt() / std::f64::consts::PI;
        assert!((fi - exact).abs() < 1e-12);
    }
    assert!(d.join("qc.csv.config.json").exists());
}

#[test]
fn law_nu_z_origin_matches_quarter_circular() {
    let d = scratch("nuz");
    let o = run(&["law", "--name", "nu-z", "--z", "0", "--alpha-mode", "finite-variance", "--grid", "0:1.9:0.1", "--output", "nu.csv"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = column(&d.join("nu.csv"), "x");
    let f = column(&d.join("nu.csv"), "density");
    assert_eq!(x.len(), 20);
    for (xi, fi) in x.iter().zip(&f) {
        let exact = (4.0 - xi * xi).sqrt() / std::f64::consts::PI;
        assert!((fi - exact).abs() < 1e-3, "x={xi}: {fi} vs {exact}");
    }
}

#[test]
fn law_g_alpha_sidecar_normalization() {
    let d = scratch("galpha");
    let o = run(&["law", "--name", "g-alpha", "--alpha", "1.0", "--grid", "0:4:0.05", "--bank-size", "200000", "--output", "g.csv"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("g.csv.sidecar.json")).unwrap()).unwrap();
    assert_eq!(side["bank_size"], 200000);
    let total = side["normalization"]["total"].as_f64().unwrap();
    assert!((total - 1.0).abs() < 0.02, "{total}");
    assert!(side["max_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(column(&d.join("g.csv"), "r").len(), 81);
}

#[test]
fn verify_identities_passes() {
    let d = scratch("verify");
    let o = run(&["verify", "--suite", "identities", "--n", "50", "--seed", "7"], &d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let reports: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("verify-identities.json")).unwrap()).unwrap();
    let arr = reports.as_array().unwrap();
    assert!(!arr.is_empty());
    assert!(arr.iter().all(|r| r["pass"] == true && r["seed"]["master"] == 7));
}

#[test]
fn transform_potential_outside_disc() {
    let d = scratch("pot");
    let o = run(
        &["transform", "--kind", "potential", "--ensemble", "ginibre-complex", "--n", "300", "--seed", "2", "--re", "2:2:1", "--im", "0:0:1", "--output", "p.csv"],
        &d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let u = column(&d.join("p.csv"), "potential");
    assert_eq!(u.len(), 1);
    assert!((u[0] + 2f64.ln()).abs() < 0.05, "{}", u[0]);
    assert!(d.join("p.csv.config.json").exists());
}

#[test]
fn transform_density_recovers_disc() {
    let d = scratch("density");
    let o = run(
        &["transform", "--kind", "density", "--ensemble", "ginibre-complex", "--n", "300", "--seed", "3", "--re=-0.6:0.6:0.2", "--im=-0.6:0.6:0.2", "--output", "d.csv"],
        &d,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = column(&d.join("d.csv"), "density");
    assert_eq!(f.len(), 49);
    let m = f.iter().sum::<f64>() / f.len() as f64;
    assert!((m - 1.0 / std::f64::consts::PI).abs() < 0.1, "{m}");
}

#[test]
fn transform_input_errors() {
    let d = scratch("terr");
    fs::write(d.join("bad.csv"), "re,im\n0.5,0\n0.1,oops\n").unwrap();
    let o = run(&["transform", "--kind", "potential", "--input", "bad.csv"], &d);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    fs::write(d.join("ok.csv"), "re,im\n0.5,0\n-0.5,0\n").unwrap();
    let o = run(&["transform", "--kind", "potential", "--input", "ok.csv", "--re", "1:0:0.1"], &d);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["transform", "--kind", "gamma", "--input", "missing.csv"], &d);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn transform_gamma_of_diagonal_input() {
    let d = scratch("gamma");
    fs::write(d.join("ok.csv"), "re,im\n0.5,0\n-0.5,0\n").unwrap();
    let o = run(&["transform", "--kind", "gamma", "--input", "ok.csv", "--re", "0:0:1", "--im", "0:0:1", "--t", "0.1", "--output", "g.csv"], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = column(&d.join("g.csv"), "a_im");
    let b = column(&d.join("g.csv"), "b_re");
    // at z = 0 each atom contributes t / (t² + |λ|²) to Im a, and b vanishes by symmetry
    assert!((a[0] - 0.1 / (0.01 + 0.25)).abs() < 1e-12, "{}", a[0]);
    assert!(b[0].abs() < 1e-12);
}
