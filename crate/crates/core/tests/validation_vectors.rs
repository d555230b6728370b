use std::path::PathBuf;

use serde_json::Value;
use yieldgame_core::validate::validate_run_fields;

fn vectors() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/validation_vectors.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shared_vectors_agree_with_the_validator() {
    let doc = vectors();
    let max_input = doc["max_input"].as_f64().unwrap();
    let cases = doc["cases"].as_array().unwrap();
    assert!(cases.len() >= 20);
    for case in cases {
        let name = case["name"].as_str().unwrap();
        let fields = case["fields"].as_object().unwrap();
        let got = validate_run_fields(fields, max_input);
        assert_eq!(got.is_ok(), case["valid"].as_bool().unwrap(), "{name}");
        let expected: Vec<(String, String)> = case["errors"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| (e["field"].as_str().unwrap().to_string(), e["code"].as_str().unwrap().to_string()))
            .collect();
        let actual: Vec<(String, String)> = got
            .err()
            .unwrap_or_default()
            .into_iter()
            .map(|e| {
                let code = serde_json::to_value(e.code).unwrap();
                (e.field, code.as_str().unwrap().to_string())
            })
            .collect();
        assert_eq!(actual, expected, "{name}");
    }
}
