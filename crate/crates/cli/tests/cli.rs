use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn across(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_across"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn pathological_matrix_fails_check() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "pathological3.txt", "001\n100\n");
    let out = across(&["check", arg(&m)]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("pathological"), "{text}");
    assert!(text.contains("X_{3,1} is not contained"), "{text}");

    let out = across(&["envelope", arg(&m)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("X_{N,1} is not contained"));
}

#[test]
fn four_factor_envelopes() {
    let dir = TempDir::new().unwrap();
    let q9 = write(&dir, "q9.txt", "0111\n1001\n1010\n1100\n");
    let out = across(&["envelope", arg(&q9)]);
    assert_eq!(out.status.code(), Some(0));
    // the certified single-sum form is contradicted by the recursion and
    // reported on the error stream
    assert_eq!(
        stdout(&out),
        "sum(h1,max(0,sum(h3,h4,-1),scale(1/2,sum(h2,h3,h4,-1)),sum(h2,h4,-1),sum(h2,h3,-1)))\n"
    );
    assert!(stderr(&out).contains("certified Q9 formula sum(h1,scale(1/2,sum(h2,h3,h4,-1)))"));

    let q6 = write(&dir, "q6.txt", "# six\n0011\n1001\n1100\n");
    let out = across(&["envelope", arg(&q6), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["closed"], true);
    assert_eq!(v["description"], "max(sum(h1,h3),sum(h2,h4),sum(h2,h3))");
    assert_eq!(v["conflicts"].as_array().unwrap().len(), 0);

    let out = across(&["envelope", arg(&q6), "--explain", "--no-certified"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("twofold("), "{}", stdout(&out));
}

#[test]
fn unreduced_input_is_a_usage_error_unless_reduced() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.txt", "0011\n0110\n1001\n1100\n0001\n");
    let out = across(&["envelope", arg(&m)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not reduced"));
    let out = across(&["envelope", "--reduce", arg(&m)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "max(sum(h2,h4),sum(h1,h3))\n");
    assert_eq!(across(&["check", arg(&m)]).status.code(), Some(1));
}

#[test]
fn reduce_round_trips() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "m.txt", "110\n100\n011\n010\n001\n");
    let once = across(&["reduce", arg(&m)]);
    assert_eq!(once.status.code(), Some(0));
    assert_eq!(stdout(&once), "011\n110\n");
    let again_in = write(&dir, "again.txt", &stdout(&once));
    let twice = across(&["reduce", arg(&again_in)]);
    assert_eq!(stdout(&twice), stdout(&once));
}

#[test]
fn enumeration_is_stable() {
    let a = across(&["enumerate", "-n", "4", "--format", "json"]);
    let b = across(&["enumerate", "-n", "4", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let list = v["matrices"].as_array().unwrap();
    assert_eq!(v["count"].as_u64().unwrap() as usize, list.len());
    // Q9 in canonical column order
    assert!(list
        .iter()
        .any(|m| m["rows"] == serde_json::json!(["0011", "0101", "1001", "1110"])));

    let csv = across(&["enumerate", "-n", "3", "--format", "csv"]);
    assert_eq!(
        stdout(&csv),
        "matrix,class\n\"{001,110}\",two-fold-grouped(001)\n"
    );

    let bad = across(&["enumerate", "-n", "4", "--filter", "antichain,bogus"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(across(&["enumerate", "-n", "6"]).status.code(), Some(2));
}

#[test]
fn eval_is_exact() {
    let out = across(&[
        "eval",
        "sum(h1,scale(1/2,sum(h2,h3,h4,-1)))",
        "--h",
        "0.5,1/2,.5,1/2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"], "3/4");
    assert_eq!(v["inside"], true);
    let out = across(&["eval", "max(h1,h2)", "--h", "0.5,1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_at_radii_uses_the_model() {
    let dir = TempDir::new().unwrap();
    let model = write(
        &dir,
        "model.json",
        r#"{"factors": [{"r": 0.5, "R": 1.0, "dim": 1}, {"r": 0.25, "R": 2.0, "dim": 2}]}"#,
    );
    let pts = write(&dir, "pts.csv", "# rho_1,rho_2\n0.5,0.25\n0.9,1.9\n");
    let out = across(&[
        "eval",
        "sum(h1,h2)",
        "--model",
        arg(&model),
        "--radii-csv",
        arg(&pts),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points[0]["value"], 0.0);
    assert_eq!(points[0]["inside"], true);
    assert_eq!(points[1]["inside"], false);
    let out = across(&[
        "eval",
        "sum(h1,h2)",
        "--model",
        arg(&model),
        "--radii",
        "0.5,3.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nine_reports_the_disagreeing_case() {
    let out = across(&["nine", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["disagreements"], 1);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 9);
    let q9 = &cases[8];
    assert_eq!(q9["case"], "Q9");
    assert_eq!(q9["comparison"]["result"], "witness");
    assert!(cases[..8]
        .iter()
        .all(|c| c["comparison"]["result"] == "equal"));
}

#[test]
fn qtilde_has_no_match_but_finds_itself() {
    let out = across(&["qtilde", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["matches"].as_array().unwrap().len(), 0);
    assert_eq!(v["open"].as_array().unwrap().len(), 0);

    let out = across(&["qtilde", "--with-target", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let matches = json(&out)["report"]["matches"].clone();
    assert_eq!(matches.as_array().unwrap().len(), 1);
    assert_eq!(matches[0]["candidate"], "target");
}

#[test]
fn verify_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let grid = dir.path().join("grid.csv");
    let run = || {
        across(&[
            "verify",
            "ENV_IN_ENV(2,1,2)",
            "--profile",
            "smoke",
            "--seed",
            "7",
            "--grid-out",
            arg(&grid),
            "--format",
            "json",
        ])
    };
    let a = run();
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let v = json(&a);
    for key in [
        "case",
        "params",
        "grid",
        "max_dev",
        "tolerance",
        "pass",
        "sweeps",
        "residual",
        "tol",
        "seed",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["grid"], serde_json::json!([33, 33]));
    assert_eq!(v["seed"], 7);
    let csv = fs::read_to_string(&grid).unwrap();
    assert!(csv.starts_with("t_1,t_2,value,mask\n"));
    assert_eq!(csv.lines().count(), 1 + 33 * 33);
    let b = run();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read_to_string(&grid).unwrap(), csv);
}

#[test]
fn verify_flags_a_failing_identity() {
    // the single-sum form of the (3,1)-cross inside the cube misses the
    // pairwise terms
    let out = across(&["verify", "ENV_IN_ENV(3,1,3)", "--profile", "smoke"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("FAIL ENV_IN_ENV(3,1,3)"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(across(&[]).status.code(), Some(2));
    assert_eq!(across(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        across(&["check", "/nonexistent/m.txt"]).status.code(),
        Some(2)
    );
    assert_eq!(across(&["verify", "NOPE"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let ragged = write(&dir, "ragged.txt", "01\n101\n");
    let out = across(&["reduce", arg(&ragged)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"));
    assert_eq!(
        across(&["reduce", arg(&ragged), "--format", "yaml"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_all_desk_passes() {
    let out = across(&["verify-all", "--profile", "desk", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["reports"].as_array().unwrap().len(), 11);
}
