use std::path::PathBuf;
use std::process::{Command, Output};

use gl2measure::{Coset, DDDSet, DDSet, GlobalParams, Level, Workspace};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl2measure")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn write_temp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gl2measure-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// `K11` as one coset, and as the disjoint union of its sixteen children.
fn split_pair() -> Workspace {
    let p = GlobalParams::new(2).unwrap();
    let d = Coset::subgroup(&p, Level::new(1, 1)).unwrap();
    let kids = d.children(&p).unwrap();
    let mut ws = Workspace::new(p);
    ws.sets.insert("D".into(), DDDSet::coset(d));
    ws.sets.insert("parts".into(), DDDSet::from_components(kids.into_iter().map(DDSet::coset).collect()));
    ws
}

#[test]
fn measure_builtins() {
    for (name, want) in [("K", "1"), ("K11", "1/6*X^4"), ("empty", "0"), ("K(2,1)", "1/96*X^4")] {
        let o = run(&["measure", name]);
        assert!(o.status.success(), "{name}");
        assert_eq!(stdout(&o), want, "{name}");
    }
    let o = run(&["--q", "3", "measure", "K"]);
    assert_eq!(stdout(&o), "1");
}

#[test]
fn unknown_name_fails() {
    let o = run(&["measure", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("UnknownName"));
}

#[test]
fn structured_output() {
    let o = run(&["--format", "structured", "measure", "K11"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["value"], "1/6*X^4");
}

#[test]
fn series_examples() {
    let o = run(&["examples", "quarter", "--s", "1", "--m", "-1", "--trunc", "2"]);
    assert_eq!(stdout(&o), "2 + 4*X + 4*X^2 + O(X^3)");
    let o = run(&["examples", "triangle", "--s", "1", "--trunc", "2"]);
    assert_eq!(stdout(&o), "2 + 1*X + 1/2*X^2 + O(X^3)");
    let o = run(&["examples", "disc"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("DivergentSeries"));
    let o = run(&["--format", "structured", "examples", "disc"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"], "DivergentSeries");
}

#[test]
fn refine_split_example() {
    let path = write_temp("split.json", &split_pair().to_json());
    let w = path.to_str().unwrap();
    for (a, b) in [("D", "parts"), ("parts", "D")] {
        let o = run(&["-w", w, "--format", "structured", "refine", a, b]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["report"]["refines_a"], true);
        assert_eq!(v["report"]["refines_b"], true);
        assert_eq!(v["report"]["measures_equal"], true);
        assert_eq!(v["report"]["measure"], "1/6*X^4");
        // (D \ ∪ D_i) ∪ D_1 ∪ ... ∪ D_16
        assert_eq!(v["refinement"].as_array().unwrap().len(), 17);
    }
}

#[test]
fn refine_identical_inputs_echoes() {
    let ws = split_pair();
    let path = write_temp("same.json", &ws.to_json());
    let o = run(&["-w", path.to_str().unwrap(), "--format", "structured", "refine", "parts", "parts"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let echoed = serde_json::to_value(gl2measure::serial::dddset_to_doc(&ws.sets["parts"])).unwrap();
    assert_eq!(v["refinement"], echoed);
}

#[test]
fn refine_unequal_sets_reports_witness() {
    let path = write_temp("unequal.json", &split_pair().to_json());
    let o = run(&["-w", path.to_str().unwrap(), "refine", "D", "K"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("NotEqualSets") && err.contains("witness"), "{err}");
}

#[test]
fn check_suites_pass() {
    let o = run(&["check", "oracle", "--count", "50"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = run(&["--seed", "18446744073709551615", "--format", "structured", "check", "invariants", "--count", "10"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["properties"].as_array().unwrap().len(), 9);
}

#[test]
fn check_output_is_deterministic() {
    let a = run(&["--seed", "5", "--parallel", "check", "all", "--count", "5"]);
    let b = run(&["--seed", "5", "check", "all", "--count", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn corrupted_workspace_names_the_pair() {
    let doc = r#"{"q": 2, "functions": {"f": {"terms": [
        {"coeff": "1", "support": "K11"},
        {"coeff": "2", "support": {"big": [{"rep": [["1","0"],["0","1"]], "level": [2,1]}]}}
    ]}}}"#;
    let path = write_temp("corrupt.json", doc);
    let o = run(&["-w", path.to_str().unwrap(), "check", "oracle", "--count", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("function `f`") && err.contains("terms 0 and 1"), "{err}");
}

#[test]
fn integrate_named_functions() {
    let doc = r#"{"q": 2,
        "functions": {"f": {"terms": [{"coeff": "6", "support": "K11"}]}},
        "fsets": {"U": [{"big": [{"center": "0", "level": [1,0]}]}]},
        "ffunctions": {"g": {"terms": [{"coeff": "2", "support": "U"}]}}}"#;
    let path = write_temp("integrate.json", doc);
    let w = path.to_str().unwrap();
    assert_eq!(stdout(&run(&["-w", w, "integrate", "f"])), "1*X^4");
    assert_eq!(stdout(&run(&["-w", w, "integrate", "g"])), "1");
    assert_eq!(stdout(&run(&["-w", w, "measure", "U"])), "1/2");
}

#[test]
fn workspace_round_trip() {
    let ws = split_pair();
    let back = Workspace::from_json(&ws.to_json(), &GlobalParams::default()).unwrap();
    assert_eq!(back, ws);
}

#[test]
fn window_flags() {
    let o = run(&["--t1-window", "-4,4", "--t2-window", "-2,2", "measure", "K11"]);
    assert_eq!(stdout(&o), "1/6*X^4");
    let o = run(&["--t1-window", "3,3", "measure", "K"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("InvalidParams"));
    assert!(!run(&["--q", "4", "measure", "K"]).status.success());
}
