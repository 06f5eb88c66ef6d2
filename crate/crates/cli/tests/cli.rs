use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn addlam(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_addlam"))
        .args(args)
        .env_remove("ADDLAM_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("addlam-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn parse_prints_canonical_form() {
    let o = addlam(&["parse", "-"], "\\x. x + zero");
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "\\x. x + zero");
    let o = addlam(&["parse", "--kind", "type", "-"], "forall X. X -> X");
    assert_eq!(stdout(&o).trim(), "forall X. X -> X");
}

#[test]
fn parse_error_exits_with_two() {
    let o = addlam(&["parse", "-"], "(\\x. x");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
}

#[test]
fn reduce_reaches_normal_form() {
    let o = addlam(&["--format", "json", "reduce", "-"], "(\\x. x) (a + b)");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], "a + b");
    assert_eq!(v["normal"], true);
}

#[test]
fn divergent_term_exhausts_fuel() {
    let o = addlam(&["--fuel", "50", "reduce", "-"], "(\\x. x x) (\\x. x x)");
    assert_eq!(o.status.code(), Some(1));
    let o = addlam(&["--budget", "500", "reduce", "--graph", "-"], "(\\x. x x) (\\x. x x)");
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("cycle"));
}

#[test]
fn elaborate_check_translate_reverse() {
    let src = scratch("app.a", "(gen X. \\x:X. x) (a + b)");
    let o = addlam(&["elaborate", "--ctx", "a : A, b : B", src.to_str().unwrap()], "");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let add = scratch("app.json", &stdout(&o));
    let o = addlam(&["check", add.to_str().unwrap()], "");
    assert_eq!(stdout(&o).trim(), "ok (add)");

    let f = add.with_file_name("app.f.json");
    let o = addlam(&["translate", add.to_str().unwrap(), "--out", f.to_str().unwrap()], "");
    assert!(o.status.success());
    assert!(stdout(&o).trim().ends_with(": A * B"));
    assert_eq!(stdout(&addlam(&["fcheck", f.to_str().unwrap()], "")).trim(), "ok (f)");
    let o = addlam(&["translate", "--reverse", f.to_str().unwrap()], "");
    assert_eq!(stdout(&o).trim(), "(\\x. x) (a + b) : A + B");
}

#[test]
fn check_rejects_a_tampered_file() {
    let src = scratch("bad.a", "(gen X. \\x:X. x) a");
    let o = addlam(&["elaborate", "--ctx", "a : A", src.to_str().unwrap()], "");
    let text = stdout(&o).replace("\"var\": \"a\"", "\"var\": \"b\"");
    assert_ne!(text, stdout(&o));
    let bad = scratch("bad.json", &text);
    let o = addlam(&["check", bad.to_str().unwrap()], "");
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn suite_reports_json_schema() {
    let o = addlam(&["--format", "json", "--seed", "4", "suite", "sr", "--count", "30"], "");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for k in ["suite", "seed", "cases", "failures", "millis"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["seed"], 4);
    assert_eq!(addlam(&["suite", "unknown"], "").status.code(), Some(2));
}

#[test]
fn seed_defaults_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_addlam"))
        .args(["--format", "json", "suite", "roundtrip", "--count", "5"])
        .env("ADDLAM_SEED", "9")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(v["seed"], 9);
}
