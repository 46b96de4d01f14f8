use std::path::Path;
use std::process::{Command, Output};

fn zarank(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zarank"))
        .args(args)
        .env("CROSSING_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn orbits_verify_prints_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = zarank(dir.path(), &["orbits", "--m", "8", "--verify"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("380 / 239"));
    assert!(dir.path().join("orbits_8.bin").exists());
}

#[test]
fn bounds_from_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table2.json");
    let o = zarank(dir.path(), &["bounds", "--from-table", table.to_str().unwrap(), "--n", "10..13", "--csv"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let bounds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(bounds, ["388", "589", "865", "1229"]);
    assert!(text.starts_with("m,n,bound,source,certified"));
}

#[test]
fn beta_then_verify_and_bounds_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let o = zarank(dir.path(), &["beta", "--m", "7", "--verify", "--json", json.to_str().unwrap()]);
    assert!(o.status.success(), "{o:?}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!((v["beta"].as_f64().unwrap() - 4.3107391257).abs() < 1e-6);
    for key in ["m", "beta", "certified_bound", "rank", "eigenvector", "rounds", "total_time"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let progress = String::from_utf8_lossy(&o.stderr);
    let first: serde_json::Value = serde_json::from_str(progress.lines().next().unwrap()).unwrap();
    assert_eq!(first["round"], 0);

    assert!(zarank(dir.path(), &["certify", "--m", "7"]).status.success());
    let o = zarank(dir.path(), &["verify", "--m", "7"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("certificate valid"));

    let o = zarank(dir.path(), &["bounds", "--from-cache", "--m", "7", "--n", "7", "--csv"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("7,7,"));
    assert!(stdout(&o).contains(",beta,true"));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zarank(dir.path(), &["beta", "--m", "6"]).status.success());
    let path = dir.path().join("certificate_6.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["t_cert"] = serde_json::json!("3/1");
    std::fs::write(&path, v.to_string()).unwrap();
    let o = zarank(dir.path(), &["verify", "--m", "6"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn corrupt_cache_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(zarank(dir.path(), &["orbits", "--m", "6"]).status.success());
    let path = dir.path().join("orbits_6.bin");
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    std::fs::write(&path, bytes).unwrap();
    let o = zarank(dir.path(), &["orbits", "--m", "6", "--verify"]);
    assert_eq!(o.status.code(), Some(6), "{o:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(zarank(dir.path(), &["q", "--m", "2"]).status.code(), Some(2));
    assert_eq!(zarank(dir.path(), &["certify", "--m", "5"]).status.code(), Some(3));
    assert_eq!(zarank(dir.path(), &["alpha", "--m", "9"]).status.code(), Some(4));
    assert_eq!(zarank(dir.path(), &["beta", "--m", "5", "--precision", "quad"]).status.code(), Some(2));
}
