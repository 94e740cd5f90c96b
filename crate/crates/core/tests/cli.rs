mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::corpus_dir;
use serde_json::Value as Json;

fn cdmn(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["cdmn"];
    argv.extend_from_slice(args);
    let code = cdmn::cli::main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn corpus(name: &str) -> String {
    corpus_dir().join(name).display().to_string()
}

fn write_model(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const TYPO: &str = "\
type: Types
Name | Type | Values
Person | string | Agatha, Butler, Charles

function: Functions
Name | Type
Age of Person | int

data: Ages
Person || Age of Person
Agatha || 80
Butler || 50
Charless || 40
";

const TOY_UNSAT: &str = "\
boolean: Booleans
Name
Rain

table: Both ways
E* || Rain
1 || Yes
2 || No
";

#[test]
fn check_reports_no_diagnostics_for_a_clean_model() {
    let (code, out, _) = cdmn(&["check", &corpus("map_coloring.cdmn")]);
    assert_eq!(code, 0);
    assert_eq!(out, "0 diagnostics\n");
}

#[test]
fn check_reports_a_misspelled_element() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "typo.cdmn", TYPO);
    let (code, out, _) = cdmn(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2, "{out}");
    assert!(lines[0].contains("ValueOutsideDomain") && lines[0].contains("Charless"), "{out}");
    assert!(lines[0].starts_with("line 13:"), "{out}");
    assert_eq!(lines[1], "1 diagnostic");
    // solving refuses the model too
    let (code, _, err) = cdmn(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("Charless"));
}

#[test]
fn check_emits_the_compiled_theory() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("theory.json");
    let (code, _, _) = cdmn(&["check", &corpus("map_coloring.cdmn"), "--emit", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: Json = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert!(doc.is_object());
}

#[test]
fn unreadable_paths_and_bad_flags_exit_2() {
    assert_eq!(cdmn(&["check", "/nonexistent/model.cdmn"]).0, 2);
    assert_eq!(cdmn(&["solve", "/nonexistent/model.cdmn"]).0, 2);
    assert_eq!(cdmn(&["solve", &corpus("adult_18.cdmn"), "--models", "0"]).0, 2);
    assert_eq!(cdmn(&["frobnicate"]).0, 2);
}

#[test]
fn unsatisfiable_model_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "toy.cdmn", TOY_UNSAT);
    let (code, out, _) = cdmn(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(out, "status: UNSAT\n");
}

#[test]
fn agatha_solves_to_the_same_killer_every_time() {
    let (code, out, _) = cdmn(&["solve", &corpus("who_killed_agatha.cdmn")]);
    assert_eq!(code, 0);
    let blocks: Vec<&str> = out.trim_end().split("---\n").collect();
    assert_eq!(blocks.len(), 10, "the execute block asks for 10 models");
    for b in &blocks {
        assert!(b.lines().any(|l| l == "Killer = Agatha"), "{b}");
        assert!(b.lines().any(|l| l == "Suicide = Yes"), "{b}");
    }
    assert!(out.ends_with("status: SAT\n"));
    let (_, out, _) = cdmn(&["solve", &corpus("who_killed_agatha.cdmn"), "--models", "3"]);
    assert_eq!(out.matches("Killer = Agatha").count(), 3);
}

#[test]
fn optimization_prints_only_the_optimum() {
    let (code, out, _) = cdmn(&["solve", &corpus("balanced_desk.cdmn")]);
    assert_eq!(code, 0);
    assert!(out.ends_with("status: OPTIMUM (objective=38)\n"), "{out}");
    assert!(!out.contains("---"));
    assert!(out.contains("Score = 38"));
}

#[test]
fn timeout_exits_3_with_an_incumbent() {
    let full = corpus_dir().join("large/balanced_full.cdmn");
    let (code, out, _) = cdmn(&["solve", full.to_str().unwrap(), "--timeout", "1"]);
    assert_eq!(code, 3);
    assert!(out.ends_with("status: LIMIT\n"));
    assert_eq!(out.matches("Group(E").count(), 210);
}

fn ground_json(path: &str) -> Json {
    let (code, out, _) = cdmn(&["ground", path]);
    assert_eq!(code, 0);
    serde_json::from_str(&out).unwrap()
}

fn constraints_of(doc: &Json, table: &str) -> usize {
    doc["constraints"].as_array().unwrap().iter().filter(|c| c["table"] == table).count()
}

#[test]
fn ground_emits_one_constraint_per_instance() {
    let agatha = ground_json(&corpus("who_killed_agatha.cdmn"));
    assert_eq!(constraints_of(&agatha, "Noone hates all"), 3);
    assert_eq!(agatha["instantiations"]["Noone hates all"], 3);
    let map = ground_json(&corpus("map_coloring.cdmn"));
    assert_eq!(map["constraints"].as_array().unwrap().len(), 7);
    assert_eq!(map["vars"].as_array().unwrap().len(), 6);
}

#[test]
fn ground_of_an_empty_theory_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "empty.cdmn", "type: Types\nName | Type | Values\nPerson | string | Ann\n");
    let doc = ground_json(path.to_str().unwrap());
    assert_eq!(doc["constraints"], serde_json::json!([]));
    assert_eq!(doc["vars"], serde_json::json!([]));
    let target = dir.path().join("out.json");
    let (code, out, _) = cdmn(&["ground", path.to_str().unwrap(), "--emit", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("0 ground constraints written to"));
    assert!(target.exists());
}

#[test]
fn output_is_deterministic() {
    for name in ["map_coloring.cdmn", "who_killed_agatha.cdmn", "monkey_business.cdmn", "burger.cdmn"] {
        let first = cdmn(&["solve", &corpus(name), "--format", "json"]);
        let second = cdmn(&["solve", &corpus(name), "--format", "json"]);
        assert_eq!(first, second, "{name}");
        assert_eq!(cdmn(&["ground", &corpus(name)]), cdmn(&["ground", &corpus(name)]));
    }
}

#[test]
fn json_and_text_agree() {
    for name in ["who_killed_agatha.cdmn", "burger.cdmn", "balanced_desk.cdmn", "adult_17.cdmn"] {
        let (_, text, _) = cdmn(&["solve", &corpus(name)]);
        let (_, json, _) = cdmn(&["solve", &corpus(name), "--format", "json"]);
        let doc: Json = serde_json::from_str(&json).unwrap();
        let models = doc["models"].as_array().unwrap();
        let blocks: Vec<&str> = text.split("---\n").collect();
        assert_eq!(models.len(), blocks.len(), "{name}");
        for (m, block) in models.iter().zip(&blocks) {
            let mut lines: Vec<String> = m["assignments"]
                .as_object()
                .unwrap()
                .iter()
                .map(|(k, v)| format!("{k} = {}", v.as_str().unwrap()))
                .collect();
            lines.sort();
            let shown: Vec<&str> = block.lines().filter(|l| !l.starts_with("status:")).collect();
            assert_eq!(lines, shown, "{name}");
        }
        let status = text.lines().last().unwrap();
        assert!(status.starts_with(&format!("status: {}", doc["status"].as_str().unwrap())), "{name}");
    }
}

#[test]
fn burger_totals() {
    let (code, out, _) = cdmn(&["solve", &corpus("burger.cdmn")]);
    assert_eq!(code, 0);
    for line in ["Total_Sodium = 710", "Total_Fat = 35", "Total_Calories = 740", "Total_Cost = 0.55"] {
        assert!(out.lines().any(|l| l == line), "{line} in {out}");
    }
}

#[test]
fn binary_runs_end_to_end() {
    let out = Command::new(env!("CARGO_BIN_EXE_cdmn"))
        .args(["solve", &corpus("adult_18.cdmn")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("is_Adult(Alice) = Yes"), "{stdout}");
    let out = Command::new(env!("CARGO_BIN_EXE_cdmn")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
