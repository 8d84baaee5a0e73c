use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).to_string_lossy().into_owned()
}

fn s3m(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_s3m")).args(args).env_remove("S3M_BUDGET").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn table_rows() {
    assert_eq!(stdout(&s3m(&["table", "Ceta7", "8"])).trim(), "Z/12 <i_eta nu>");
    assert_eq!(stdout(&s3m(&["table", "P5(2^1)", "7"])).trim(), "Z/4 <i nu4> + Z/2 <etatilde eta>");
    assert_eq!(stdout(&s3m(&["table", "S6", "6"])).trim(), "Z <id>");
}

#[test]
fn table_parse_error_has_position() {
    let o = s3m(&["table", "P5(2^", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error at"));
}

#[test]
fn compose_pinch() {
    assert_eq!(stdout(&s3m(&["compose", "q[P7(2^1)]", "8", "[1*etatilde]"])).trim(), "[1*eta]");
}

#[test]
fn reduce_examples() {
    let o = s3m(&["reduce", "P7(2^2)", "[1*i_eta2 + 1*etatilde]", "--trace"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("[1*etatilde]"));
    assert!(lines.next().unwrap().trim_start().starts_with("reduce-plus:"));

    let out = stdout(&s3m(&["reduce", "S5 v S7", "[0; 0]", "--trace"]));
    assert_eq!(out.trim(), "[0; 0]");

    let out = stdout(&s3m(&["reduce", "S5", "[1*eta3 + 1*alpha1]", "--trace"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("[1*eta3 + 1*alpha1]"));
    assert!(lines.next().unwrap().trim_start().starts_with("4nu:"));
}

#[test]
fn classify_trivial() {
    let o = s3m(&["classify", &fixture("trivial.txt")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "S9 v W7 [Thm1.2/1a]");
}

#[test]
fn classify_sq2_two_local() {
    let out = stdout(&s3m(&["classify", &fixture("sq2.txt"), "--local", "2"]));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.ends_with("[Thm1.1/2]")));
}

#[test]
fn classify_json_schema() {
    let out = stdout(&s3m(&["classify", &fixture("theta_p1.txt"), "--json"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["schema"], 1);
    let tags: Vec<_> = v["candidates"].as_array().unwrap().iter().map(|c| c["tag"].as_str().unwrap().to_string()).collect();
    assert_eq!(tags, ["Thm1.2/2b(ii)", "Thm1.2/2b(v)"]);
}

#[test]
fn exit_codes() {
    let o = s3m(&["classify", &fixture("bad_torsion.txt")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t1+t2+t4 != m2"));
    assert_eq!(s3m(&["classify", &fixture("no_carrier.txt")]).status.code(), Some(3));
    assert_eq!(s3m(&["classify", &fixture("triple_no_room.txt")]).status.code(), Some(3));
    assert_eq!(s3m(&["oracle", "P7(2^2)", "--budget", "1"]).status.code(), Some(4));
}

#[test]
fn budget_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_s3m")).args(["oracle", "S6 v S7"]).env("S3M_BUDGET", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn oracle_two_spheres() {
    let out = stdout(&s3m(&["oracle", "S6vS7"]));
    assert!(out.contains("orbits: 3"));
    assert!(out.contains("mismatches: 0"));
}

#[test]
fn batch_keeps_order() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let o = Command::new(env!("CARGO_BIN_EXE_s3m")).current_dir(&dir).args(["classify", "--batch", "batch.txt"]).output().unwrap();
    let out = stdout(&o);
    let heads: Vec<_> = out.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(heads, ["== trivial.txt", "== sq2.txt"]);
}

#[test]
fn audit_passes() {
    for f in ["trivial.txt", "sq2.txt", "theta_p1.txt"] {
        let o = s3m(&["audit", &fixture(f)]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}
