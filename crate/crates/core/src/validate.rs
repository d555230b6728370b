//! Field-level validation of a run request, shared by every front end.
//!
//! A coordinate is valid when present, numeric, finite, strictly positive
//! and no larger than the configured maximum. Front ends may carry values
//! as JSON numbers or as the raw text of a form field.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::engine::MAX_REPS;
use crate::point::{InputPoint, INPUT_NAMES, NUM_INPUTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldErrorCode {
    Missing,
    NotANumber,
    NotFinite,
    NotPositive,
    TooLarge,
    NotAnInteger,
    OutOfRange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub code: FieldErrorCode,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, code: FieldErrorCode, message: String) -> Self {
        Self {
            field: field.to_string(),
            code,
            message,
        }
    }
}

/// A request that passed every rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidRun {
    pub point: InputPoint,
    pub reps: u32,
}

enum Parsed {
    Missing,
    Number(f64),
    Garbage,
}

fn parse_value(value: Option<&Value>) -> Parsed {
    match value {
        None | Some(Value::Null) => Parsed::Missing,
        Some(Value::Number(n)) => n.as_f64().map_or(Parsed::Garbage, Parsed::Number),
        Some(Value::String(s)) => {
            let t = s.trim();
            if t.is_empty() {
                Parsed::Missing
            } else {
                t.parse::<f64>().map_or(Parsed::Garbage, Parsed::Number)
            }
        }
        Some(_) => Parsed::Garbage,
    }
}

pub fn validate_coordinate(name: &str, value: Option<&Value>, max_input: f64) -> Result<f64, FieldError> {
    use FieldErrorCode::*;
    match parse_value(value) {
        Parsed::Missing => Err(FieldError::new(name, Missing, format!("{name} is required"))),
        Parsed::Garbage => Err(FieldError::new(name, NotANumber, format!("{name} must be a number"))),
        Parsed::Number(x) if !x.is_finite() => {
            Err(FieldError::new(name, NotFinite, format!("{name} must be finite")))
        }
        Parsed::Number(x) if x <= 0.0 => {
            Err(FieldError::new(name, NotPositive, format!("{name} must be positive")))
        }
        Parsed::Number(x) if x > max_input => Err(FieldError::new(
            name,
            TooLarge,
            format!("{name} must be at most {max_input}"),
        )),
        Parsed::Number(x) => Ok(x),
    }
}

pub fn validate_reps(value: Option<&Value>) -> Result<u32, FieldError> {
    use FieldErrorCode::*;
    match parse_value(value) {
        Parsed::Missing => Err(FieldError::new("reps", Missing, "reps is required".into())),
        Parsed::Garbage => Err(FieldError::new("reps", NotANumber, "reps must be a number".into())),
        Parsed::Number(x) if x.fract() != 0.0 || !x.is_finite() => Err(FieldError::new(
            "reps",
            NotAnInteger,
            "reps must be a whole number".into(),
        )),
        Parsed::Number(x) if x < 1.0 || x > f64::from(MAX_REPS) => Err(FieldError::new(
            "reps",
            OutOfRange,
            format!("reps must be between 1 and {MAX_REPS}"),
        )),
        Parsed::Number(x) => Ok(x as u32),
    }
}

/// Checks all seven coordinates and `reps`, reporting every failing field.
pub fn validate_run_fields(fields: &Map<String, Value>, max_input: f64) -> Result<ValidRun, Vec<FieldError>> {
    let mut errors = Vec::new();
    let mut coords = [0.0; NUM_INPUTS];
    for (slot, name) in coords.iter_mut().zip(INPUT_NAMES) {
        match validate_coordinate(name, fields.get(name), max_input) {
            Ok(x) => *slot = x,
            Err(e) => errors.push(e),
        }
    }
    let reps = validate_reps(fields.get("reps")).map_err(|e| errors.push(e)).ok();
    match reps {
        Some(reps) if errors.is_empty() => Ok(ValidRun {
            point: InputPoint::from_array(coords),
            reps,
        }),
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn fields(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    fn full() -> Value {
        json!({"N": 1, "P": 2.5, "K": "3", "Na": " 4 ", "Ca": 5, "Mg": 6, "Nx": 7, "reps": 3})
    }

    #[test]
    fn accepts_numbers_and_numeric_text() {
        let ok = validate_run_fields(&fields(full()), 1000.0).unwrap();
        assert_eq!(ok.point.to_array(), [1.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(ok.reps, 3);
    }

    #[test]
    fn missing_field_is_named() {
        let mut f = fields(full());
        f.remove("Mg");
        let errs = validate_run_fields(&f, 1000.0).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "Mg");
        assert_eq!(errs[0].code, FieldErrorCode::Missing);
    }

    #[test]
    fn each_rule() {
        let cases = [
            (json!(-1), FieldErrorCode::NotPositive),
            (json!(0), FieldErrorCode::NotPositive),
            (json!(""), FieldErrorCode::Missing),
            (json!(null), FieldErrorCode::Missing),
            (json!("abc"), FieldErrorCode::NotANumber),
            (json!("inf"), FieldErrorCode::NotFinite),
            (json!(true), FieldErrorCode::NotANumber),
            (json!(1000.5), FieldErrorCode::TooLarge),
        ];
        for (value, code) in cases {
            let mut f = fields(full());
            f.insert("N".into(), value.clone());
            let errs = validate_run_fields(&f, 1000.0).unwrap_err();
            assert_eq!(errs[0].code, code, "{value}");
            assert_eq!(errs[0].field, "N");
        }
    }

    #[test]
    fn reps_rules() {
        for (v, code) in [
            (json!(0), FieldErrorCode::OutOfRange),
            (json!(11), FieldErrorCode::OutOfRange),
            (json!(2.5), FieldErrorCode::NotAnInteger),
            (json!(null), FieldErrorCode::Missing),
        ] {
            let mut f = fields(full());
            f.insert("reps".into(), v);
            let errs = validate_run_fields(&f, 1000.0).unwrap_err();
            assert_eq!(errs[0].code, code);
        }
    }

    #[test]
    fn reports_every_bad_field() {
        let errs = validate_run_fields(&fields(json!({"N": -2, "reps": 20})), 1000.0).unwrap_err();
        let named: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(named, vec!["N", "P", "K", "Na", "Ca", "Mg", "Nx", "reps"]);
    }
}
