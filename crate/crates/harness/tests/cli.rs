use std::path::Path;
use std::process::{Command, Output};

fn mipt(dir: &Path, threads: Option<usize>, args: &[&str]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mipt"));
    c.current_dir(dir).args(args);
    if let Some(n) = threads {
        c.env("MIPT_THREADS", n.to_string());
    }
    c.output().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn couplings_at_q2() {
    let dir = tempfile::tempdir().unwrap();
    let o = mipt(dir.path(), None, &["couplings", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("couplings.json"));
    let jv = v["diagnostics"]["couplings"][0]["j_vert"].as_f64().unwrap();
    assert!((jv - 0.111572).abs() < 1e-6);
    assert_eq!(v["config"]["q"], "2");
    assert!(v["version"].as_str().is_some_and(|s| !s.is_empty()));
    let csv = std::fs::read_to_string(dir.path().join("couplings.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains(",j_vert,")));
}

#[test]
fn all_z_boundary_has_two_dits() {
    let dir = tempfile::tempdir().unwrap();
    let o = mipt(dir.path(), None, &["graph-scan", "--q", "2", "--px", "0", "--lx", "64", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("graph-scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("model,q,lx,ly,param,region,sample,seed,value"));
    let values: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 40);
    assert!(values.iter().all(|&v| v == 2.0));
    assert!(dir.path().join("graph-scan.svg").exists());
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    for (text, extra) in [
        ("q = 2\nlx 64\n", vec![]),
        ("q = 4\n", vec![]),
        ("q = 2\nsweeps = 10\n", vec![]),
        ("px = 0.5\n", vec!["--window", "2"]),
        ("px = 1.5\n", vec![]),
    ] {
        std::fs::write(&cfg, text).unwrap();
        let mut args = vec!["graph-scan", "--config", cfg.to_str().unwrap(), "--lx", "16"];
        args.extend(extra);
        let o = mipt(dir.path(), None, &args);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    }
    assert_eq!(mipt(dir.path(), None, &["graph-scan", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(mipt(dir.path(), None, &["nonsense"]).status.code(), Some(2));
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files, vec![std::ffi::OsString::from("run.cfg")]);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small scan\nlx = 16\npx = 0\nsamples = 2\nout = first\n").unwrap();
    let o = mipt(dir.path(), None, &["graph-scan", "--config", cfg.to_str().unwrap(), "--out", "sub/second"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("first.csv").exists());
    let v = json(&dir.path().join("sub/second.json"));
    assert_eq!(v["config"]["lx"], "16");
    assert_eq!(v["config"]["out"], "sub/second");
}

#[test]
fn failed_fit_exits_three_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["mutual-info", "--lx", "16", "--samples", "4", "--pairs", "5", "--min-count", "100000"];
    let o = mipt(dir.path(), None, &args);
    assert_eq!(o.status.code(), Some(3));
    let v = json(&dir.path().join("mutual-info.json"));
    assert!(!v["errors"].as_array().unwrap().is_empty());
    assert!(dir.path().join("mutual-info.csv").exists());
}

#[test]
fn output_is_independent_of_thread_count() {
    let runs: [&[&str]; 3] = [
        &["graph-scan", "--q", "3", "--lx", "16,24", "--px", "0.8,0.9", "--samples", "12"],
        &["clifford-purify", "--lx", "16", "--tau", "0.25:1:0.25", "--samples", "12"],
        &["rbim-mc", "--l", "8", "--k", "0.4,0.5", "--sweeps", "50", "--realizations", "6"],
    ];
    for args in runs {
        let mut csvs = Vec::new();
        for threads in [1, 8] {
            let dir = tempfile::tempdir().unwrap();
            let o = mipt(dir.path(), Some(threads), args);
            assert!(matches!(o.status.code(), Some(0 | 3)), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            let name = format!("{}.csv", args[0]);
            csvs.push(std::fs::read(dir.path().join(name)).unwrap());
        }
        assert_eq!(csvs[0], csvs[1], "{args:?}");
    }
}

#[test]
fn verify_agrees_with_dense_reference() {
    let dir = tempfile::tempdir().unwrap();
    let o = mipt(dir.path(), None, &["verify", "--q", "3", "--lx", "5", "--cases", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = mipt(dir.path(), None, &["verify", "--q", "2", "--lx", "30"]);
    assert_eq!(o.status.code(), Some(2));
}
