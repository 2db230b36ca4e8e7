#![allow(dead_code)]

use std::path::PathBuf;

use adyna::experiment::load_corpus;
use adyna::Subject;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Subject {
    let path = fixture_path(&format!("{name}.mini"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Subject::from_source(name, &src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus_subject(name: &str) -> Subject {
    let path = corpus_dir().join(format!("{name}.mini"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Subject::from_source(name, &src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus() -> Vec<Subject> {
    let (subjects, skipped) = load_corpus(&corpus_dir()).expect("corpus directory");
    assert!(skipped.is_empty(), "corpus files failed to load: {skipped:?}");
    subjects
}

pub fn subject_from(name: &str, src: &str) -> Subject {
    Subject::from_source(name, src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Builds tests from a JSON array of statement lists, in the suite file format.
pub fn tests_from(subject: &Subject, statements: &str) -> Vec<adyna::testcase::TestCase> {
    let lists: Vec<serde_json::Value> = serde_json::from_str(statements).expect("statement lists");
    let tests: Vec<serde_json::Value> = lists.into_iter().map(|s| serde_json::json!({ "statements": s })).collect();
    let suite = serde_json::json!({ "subject": subject.name, "algorithm": "manual", "seed": 0, "tests": tests });
    adyna::testcase::suite_from_json(&subject.program, &suite.to_string()).expect("valid hand-written tests").tests
}
