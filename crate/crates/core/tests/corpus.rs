mod common;

use std::fs;
use std::path::Path;

use cdmn::corpus::{cmd_corpus, entries, expected_path, oracle_expectation, DEFAULT_TIMEOUT};
use common::{compile, corpus_dir};

fn run_corpus(dir: &Path) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cmd_corpus(dir, false, DEFAULT_TIMEOUT, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn copy_corpus(to: &Path) {
    for entry in fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            fs::copy(&path, to.join(path.file_name().unwrap())).unwrap();
        }
    }
}

#[test]
fn every_corpus_model_passes() {
    let (code, out, _) = run_corpus(&corpus_dir());
    assert_eq!(code, 0, "{out}");
    let n = entries(&corpus_dir()).unwrap().len();
    assert!(n >= 7);
    assert!(out.ends_with(&format!("{n}/{n} passed\n")), "{out}");
}

#[test]
fn committed_expectations_match_a_fresh_oracle_run() {
    for path in entries(&corpus_dir()).unwrap() {
        let fresh = oracle_expectation(&compile(&fs::read_to_string(&path).unwrap())).unwrap();
        let committed: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(expected_path(&path)).unwrap()).unwrap();
        assert_eq!(fresh, committed, "{}", path.display());
    }
}

#[test]
fn regeneration_rewrites_expectations_in_place() {
    let dir = tempfile::tempdir().unwrap();
    copy_corpus(dir.path());
    let target = dir.path().join("adult_18.expected.json");
    fs::write(&target, "{}").unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_corpus(dir.path(), true, DEFAULT_TIMEOUT, &mut out, &mut err), 0);
    let original = fs::read_to_string(corpus_dir().join("adult_18.expected.json")).unwrap();
    assert_eq!(fs::read_to_string(&target).unwrap(), original);
    assert!(String::from_utf8(out).unwrap().contains("REGEN"));
}

#[test]
fn narrowed_color_range_is_caught() {
    // an exclusive upper bound in range parsing would read [1..4] as three colors
    let dir = tempfile::tempdir().unwrap();
    copy_corpus(dir.path());
    let map = dir.path().join("map_coloring.cdmn");
    let text = fs::read_to_string(&map).unwrap();
    assert!(text.contains("[1..4]"));
    fs::write(&map, text.replace("[1..4]", "[1..3]")).unwrap();
    let (code, out, _) = run_corpus(dir.path());
    assert_eq!(code, 1);
    let line = out.lines().find(|l| l.starts_with("map_coloring")).unwrap();
    assert!(line.contains("FAIL"), "{line}");
    assert!(out.lines().filter(|l| l.contains("FAIL")).count() == 1, "{out}");
}

#[test]
fn missing_expectation_fails_the_entry() {
    let dir = tempfile::tempdir().unwrap();
    copy_corpus(dir.path());
    fs::remove_file(dir.path().join("burger.expected.json")).unwrap();
    let (code, out, _) = run_corpus(dir.path());
    assert_eq!(code, 1);
    assert!(out.contains("burger") && out.contains("no expectation file"), "{out}");
}

#[test]
fn empty_or_missing_directory_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_corpus(dir.path());
    assert_eq!(code, 2);
    assert!(err.contains("no models"));
    let (code, _, _) = run_corpus(&dir.path().join("absent"));
    assert_eq!(code, 2);
}
