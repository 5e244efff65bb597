use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circle-quant"))
}

#[test]
fn quantise_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("cyl.json");
    fs::write(&spec, r#"{"kind":"cylinder","window":{"x":[-2.5,2.5]}}"#).unwrap();
    let out = dir.path().join("report.json");
    let st = bin().arg("quantise").arg(&spec).arg("--out").arg(&out).arg("--csv").status().unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["per_degree"]["1"]["finite"], 5);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    fs::write(&spec, r#"{"kind":"liouville","n":2,"k":3}"#).unwrap();
    let o = bin().arg("quantise").arg(&spec).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.k"));

    fs::write(&spec, r#"{"kind":"product","left":{"kind":"linear","n":1},"right":{"kind":"cylinder"}}"#).unwrap();
    let o = bin().arg("quantise").arg(&spec).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cylinder "));
}

#[test]
fn verify_is_deterministic_and_reports_failures() {
    let run = |suite: &str| {
        bin()
            .args(["verify", "--suite", suite, "--seed", "42", "--samples", "5"])
            .output()
            .unwrap()
    };
    let a = run("homotopy");
    let b = run("homotopy");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let ff = run("focusfocus");
    assert_eq!(ff.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&ff.stderr).contains("locus_vanishing"));
}

#[test]
fn holonomy_and_divide() {
    let o = bin()
        .args(["holonomy", "--model", "cylinder", "--point", "0.25,1.0", "--oracle"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["formula"][0].as_f64().unwrap().abs() < 1e-12);
    assert!((v["formula"][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["difference"].as_f64().unwrap() < 1e-8);

    let o = bin().args(["divide", "--fn", "z", "--point", "0,0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin().args(["divide", "--fn", "one", "--raw", "--point", "0.3,0.3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bs_window_override() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("disk.json");
    fs::write(&spec, r#"{"kind":"disk"}"#).unwrap();
    let o = bin()
        .args(["bs", "--spec"])
        .arg(&spec)
        .args(["--window", "0:7", "--disk-convention", "paper-printed"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().nth(1).unwrap().starts_with("0,elliptic_singular"));
}
