use std::fs;

use coursemap_cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("coursemap").chain(list.iter().copied()).map(String::from).collect()
}

#[test]
fn exit_codes() {
    assert_eq!(run(args(&["--help"])), EXIT_OK);
    assert_eq!(run(args(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(run(args(&["stats", "--corpus", "/definitely/not/here"])), EXIT_DATA);
    assert_eq!(run(args(&["bench", "--zoom", "3:1"])), EXIT_USAGE);
}

#[test]
fn synth_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("course");
    let c = corpus.to_str().unwrap();
    assert_eq!(run(args(&["synth", "--seed", "2", "--chapters", "4", "--out", c])), EXIT_OK);
    assert!(corpus.join("index.txt").exists());
    assert!(corpus.join("groundtruth.txt").exists());

    let table = dir.path().join("table.json");
    assert_eq!(run(args(&["analyze", "--corpus", c, "--out", table.to_str().unwrap()])), EXIT_OK);
    let v: Value = serde_json::from_str(&fs::read_to_string(&table).unwrap()).unwrap();
    assert!(v.is_object());

    let map = dir.path().join("map.json");
    let code = run(args(&["indexmap", "--corpus", c, "--zoom", "2", "--out", map.to_str().unwrap()]));
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&fs::read_to_string(&map).unwrap()).unwrap();
    for item in v["items"].as_array().unwrap() {
        assert!(item["doc_freq"].as_u64().unwrap() <= 2);
    }

    assert_eq!(run(args(&["indexmap", "--corpus", c, "--zoom", "9"])), EXIT_DATA);

    let cm = dir.path().join("match.json");
    assert_eq!(run(args(&["chaptermatch", "--corpus", c, "--out", cm.to_str().unwrap()])), EXIT_OK);
    let v: Value = serde_json::from_str(&fs::read_to_string(&cm).unwrap()).unwrap();
    assert_eq!(v["scores"].as_array().unwrap().len(), 4);
}
