use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn heislab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heislab"))
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(suite: &str, cfg: &Path, out: &Path, threads: Option<usize>, extra: &[&str]) -> Output {
    let mut c = heislab();
    c.arg(suite).arg("--config").arg(cfg).arg("--out").arg(out).args(extra);
    if let Some(t) = threads {
        c.env("RAYON_NUM_THREADS", t.to_string());
    }
    c.output().unwrap()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "json") && !p.ends_with("manifest.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = config(tmp.path(), "e.json", "{}");
    let out = tmp.path().join("o");
    assert_eq!(run("bogus-suite", &empty, &out, None, &[]).status.code(), Some(2));
    let missing = tmp.path().join("missing.json");
    assert_eq!(run("geom-selftest", &missing, &out, None, &[]).status.code(), Some(2));
    let garbage = config(tmp.path(), "g.json", "{not json");
    assert_eq!(run("geom-selftest", &garbage, &out, None, &[]).status.code(), Some(2));
    let unknown_field = config(tmp.path(), "u.json", r#"{"sede": 3}"#);
    assert_eq!(run("geom-selftest", &unknown_field, &out, None, &[]).status.code(), Some(2));
    let mismatch = config(tmp.path(), "m.json", r#"{"suite": "corona"}"#);
    assert_eq!(run("geom-selftest", &mismatch, &out, None, &[]).status.code(), Some(2));
    let bad_kernel = config(tmp.path(), "k.json", r#"{"kernels": ["riesz_w"]}"#);
    assert_eq!(run("kernels-check", &bad_kernel, &out, None, &[]).status.code(), Some(2));
    let bad_eps = config(tmp.path(), "x.json", r#"{"epsilons": [0.1, -1.0]}"#);
    assert_eq!(run("sio-norm-sweep", &bad_eps, &out, None, &[]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn geom_selftest_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"suite": "geom-selftest"}"#);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run("geom-selftest", &cfg, &a, None, &["--seed", "1"]).status.success());
    assert!(run("geom-selftest", &cfg, &b, None, &["--seed", "1"]).status.success());
    assert_eq!(csvs(&a), csvs(&b));
    let csv = fs::read_to_string(a.join("geom-selftest.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")), "{csv}");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["suite"], "geom-selftest");
    assert_eq!(m["seed"], 1);
    assert!(m["versions"]["heislab-core"].is_string());
    assert!(m["wall_time"].as_f64().unwrap() >= 0.0);
    let c = tmp.path().join("c");
    assert!(run("geom-selftest", &cfg, &c, None, &["--seed", "2"]).status.success());
    assert_ne!(csvs(&a), csvs(&c));
}

#[test]
fn hilbert_sweep_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"kernels": ["hilbert"], "n": 512, "epsilons": [0.03125, 0.125, 0.0625, 0.25]}"#);
    let out = tmp.path().join("o");
    assert!(run("sio-norm-sweep", &cfg, &out, None, &[]).status.success());
    let text = fs::read_to_string(out.join("sio-norm-sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "kernel,curve,epsilon,n,op_norm,assembly_seconds");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 4);
    let eps: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(eps.windows(2).all(|w| w[1] < w[0]));
    for r in &rows {
        let v: f64 = r[4].parse().unwrap();
        assert!(v > 0.0 && v <= std::f64::consts::PI, "{v}");
        assert_eq!(r[5], "");
    }
    let timed = config(tmp.path(), "t.json", r#"{"kernels": ["hilbert"], "n": 64, "epsilons": [0.25], "timing": true}"#);
    let out2 = tmp.path().join("t");
    assert!(run("sio-norm-sweep", &timed, &out2, None, &[]).status.success());
    let text = fs::read_to_string(out2.join("sio-norm-sweep.csv")).unwrap();
    let last = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    assert!(last.parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn corona_modes_write_decompositions() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"mode": "tame", "fixtures": ["sine"], "etas": [0.5], "depth": 6}"#);
    let out = tmp.path().join("o");
    assert!(run("corona", &cfg, &out, None, &[]).status.success());
    let csv = fs::read_to_string(out.join("corona.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("tame,sine,0.5,6,"));
    let json = fs::read_to_string(out.join("corona-tame-sine-eta0.5.json")).unwrap();
    heislab_core::corona::CoronaDecomposition::from_json(&json).unwrap();
}

#[test]
fn numeric_failure_exits_1() {
    // a valid config whose cube system cannot be built from two samples at depth 16
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"curve": "hilbert-line", "n": 2, "depth": 16}"#);
    let out = run("beta-carleson", &cfg, &tmp.path().join("o"), None, &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("sio-norm-sweep", r#"{"kernels": ["hilbert", "gradlog_x"], "curve": "ilg-sine", "n": 512, "epsilons": [0.125, 0.03125]}"#),
        ("flags-norm", r#"{"kernels": ["grad_norm_x", "grad_norm_y"], "grid": [16, 16], "epsilons": [0.25, 0.125]}"#),
        ("kernels-check", r#"{"samples": 500}"#),
        ("beta-carleson", r#"{"n": 513, "depth": 5}"#),
        ("corona", r#"{"fixtures": ["sine"], "depth": 7}"#),
        ("tame-extend", r#"{"samples": 20}"#),
    ];
    for (suite, body) in cases {
        let cfg = config(tmp.path(), &format!("{suite}.json"), body);
        let one = tmp.path().join(format!("{suite}-1"));
        let many = tmp.path().join(format!("{suite}-4"));
        let a = run(suite, &cfg, &one, Some(1), &["--seed", "7"]);
        let b = run(suite, &cfg, &many, Some(4), &["--seed", "7"]);
        assert!(a.status.success() && b.status.success(), "{suite}: {}", String::from_utf8_lossy(&a.stderr));
        let (x, y) = (csvs(&one), csvs(&many));
        assert!(!x.is_empty());
        assert_eq!(x, y, "{suite} differs between 1 and 4 threads");
    }
}
