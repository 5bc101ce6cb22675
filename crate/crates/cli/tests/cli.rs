use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_singcert"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("singcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_dz1_succeeds() {
    let out = scratch("dz1.json", "");
    let o = bin()
        .args(["certify"])
        .arg(fixture("dz1.sys"))
        .arg(fixture("dz1.start"))
        .args(["--eps", "0.005", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("4 -> 4 -> 0"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(json["certified"], true);
    assert_eq!(json["corank_sequence"], serde_json::json!([4, 4, 0]));
}

#[test]
fn regular_system_needs_no_deflation() {
    let sys = scratch("regular.sys", "vars x y\nx^2 - 2\ny - x\n");
    let start = scratch("regular.start", "1.41\n1.41\n");
    let o = bin()
        .arg("certify")
        .arg(&sys)
        .arg(&start)
        .arg("--json")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["deflations"], 0);
}

#[test]
fn parse_error_exits_2() {
    let sys = scratch("bad.sys", "vars x\nx^2 + y\n");
    let start = scratch("bad.start", "0.1\n");
    let o = bin().arg("certify").arg(&sys).arg(&start).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .arg("certify")
        .arg("/nonexistent.sys")
        .arg(&start)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn not_certified_exits_3() {
    let o = bin()
        .arg("certify")
        .arg(fixture("dz1.sys"))
        .arg(fixture("dz1.start"))
        .args(["--eps", "0.005", "--inflation-rounds", "0"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn deflation_cap_exits_4() {
    let o = bin()
        .arg("certify")
        .arg(fixture("dz2.sys"))
        .arg(fixture("dz2.start"))
        .args(["--eps", "0.005", "--max-deflations", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn complex_flag_runs_caprasse() {
    let o = bin()
        .arg("certify")
        .arg(fixture("caprasse.sys"))
        .arg(fixture("caprasse.start"))
        .args(["--eps", "0.005", "--complex"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn bench_only_prints_one_row() {
    let o = bin().args(["bench", "--only", "dz1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("dz1"));
}

#[test]
fn bench_json_lines_are_deterministic() {
    let run = || {
        let o = bin().args(["bench", "--json"]).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
            .lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("runtime_ms");
                v
            })
            .collect::<Vec<_>>()
    };
    let a = run();
    assert_eq!(a.len(), 14);
    assert!(a.iter().all(|v| v["certified"] == true));
    assert_eq!(a, run());
}

#[test]
fn soundness_has_no_false_certificates() {
    let o = bin()
        .args(["soundness", "--seed", "3", "--trials", "30"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("false certificates 0"));
}
