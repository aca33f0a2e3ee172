use std::path::Path;
use std::process::{Command, Output};

fn bohrseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bohrseq")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn enum_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"[{"kind":"rational","num":1,"den":3}]"#);
    let o = bohrseq(&["enum", "--alphas", &a, "--eps", "1/10", "--limit", "10"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3\n6\n9\n");

    let o = bohrseq(&["decompose", "--alphas", &a, "--eps", "1/10", "--limit", "10"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["generators"][0]["n"], 3);
    assert_eq!(v["generators"][0]["K"], 3);
    assert_eq!(v["R"], 1);
    assert_eq!(v["c1"], 1);
    assert_eq!(v["achieved_b"], "9/10");
}

#[test]
fn arcs_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.json",
        r#"{"alphas":[{"kind":"rational","num":1,"den":2}]}"#,
    );
    let o = bohrseq(&[
        "arcs", "--alphas", &a, "--eps", "1/10", "--limit", "4", "--cutoff", "1/6",
    ]);
    assert!(o.status.success());
    // constraints n = 2, 4: radius 1/24 around 0 and 1/2
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arcs: Vec<(String, String)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|x| (x["lo"].as_str().unwrap().into(), x["hi"].as_str().unwrap().into()))
        .collect();
    assert_eq!(
        arcs,
        vec![("11/24".into(), "13/24".into()), ("23/24".into(), "1/24".into())]
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"[{"kind":"rational","num":1,"den":3}]"#);
    let bad = write(dir.path(), "bad.json", r#"{"nothing":true}"#);
    let o = bohrseq(&["enum", "--alphas", &bad, "--eps", "1/10", "--limit", "10"]);
    assert_eq!(o.status.code(), Some(4));
    let o = bohrseq(&[
        "arcs", "--alphas", &a, "--eps", "1/10", "--limit", "10", "--cutoff", "1/2",
    ]);
    assert_eq!(o.status.code(), Some(4));
    let g = write(dir.path(), "g.json", r#"[{"kind":"sqrt","radicand":2}]"#);
    let seq = dir.path().join("seq.csv");
    let rep = dir.path().join("report.json");
    let o = bohrseq(&[
        "build",
        "--group",
        &g,
        "--stages",
        "2",
        "--out",
        seq.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
        "--arc-budget",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["complete"], false);
    let o = bohrseq(&[
        "build",
        "--group",
        &g,
        "--stages",
        "1",
        "--out",
        seq.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
        "--precision-cap",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = write(d, "g.json", r#"{"generators":[{"kind":"rational","num":1,"den":2}]}"#);
    let member = write(d, "m.json", r#"{"combination":[1]}"#);
    let other = write(d, "o.json", r#"{"kind":"rational","num":1,"den":3}"#);
    let seq = d.join("seq.csv").to_str().unwrap().to_string();
    let rep = d.join("report.json").to_str().unwrap().to_string();
    let out = d.join("verify.csv").to_str().unwrap().to_string();
    let o = bohrseq(&["build", "--group", &g, "--stages", "3", "--out", &seq, "--report", &rep]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&seq).unwrap();
    assert!(text.starts_with("stage,t_index,n\n"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["stages"].as_array().unwrap().len(), 3);
    for s in report["stages"].as_array().unwrap() {
        assert_eq!(s["certificates"]["ii"], true);
        assert_eq!(s["certificates"]["ordering"], true);
        for key in ["eps_t", "N_t", "M_t", "delta_t", "c1", "c2", "term_t", "S_t_size"] {
            assert!(!s[key].is_null(), "{key}");
        }
    }

    let o = bohrseq(&[
        "verify", "--seq", &seq, "--report", &rep, "--beta", &member, "--mode", "member", "--r", "1", "--out", &out,
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("stage,n,norm_hi,partial_sum_hi\n"));

    let o = bohrseq(&[
        "verify",
        "--seq",
        &seq,
        "--report",
        &rep,
        "--beta",
        &other,
        "--mode",
        "nonmember",
        "--out",
        &out,
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("stage,witness_n,witness_norm_lo\n"));

    // member mode needs a combination, and r
    let o = bohrseq(&[
        "verify", "--seq", &seq, "--report", &rep, "--beta", &other, "--mode", "member", "--r", "1", "--out", &out,
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = bohrseq(&[
        "verify", "--seq", &seq, "--report", &rep, "--beta", &member, "--mode", "member", "--out", &out,
    ]);
    assert!(!o.status.success());
}
