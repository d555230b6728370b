//! The downloadable history file.
//!
//! ```text
//! week,N,P,K,Na,Ca,Mg,Nx,y1,y2,y3,y4,y5,y6,y7,y8,y9,y10
//! ```
//!
//! One row per run, newest first. Unused replicate slots hold `NA`. Numbers
//! use the shortest decimal form that parses back to the same `f64`.

use std::fmt::Write;

use thiserror::Error;

use crate::engine::{replicate_cost, PlayerAccount, MAX_REPS};
use crate::point::{InputPoint, NUM_INPUTS};

pub const EXPORT_HEADER: &str = "week,N,P,K,Na,Ca,Mg,Nx,y1,y2,y3,y4,y5,y6,y7,y8,y9,y10";

const COLUMNS: usize = 1 + NUM_INPUTS + MAX_REPS as usize;

#[derive(Clone, Debug, PartialEq)]
pub struct ExportRow {
    pub week: u32,
    pub point: InputPoint,
    pub yields: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("missing or unexpected header")]
    Header,
    #[error("line {line}: expected {COLUMNS} fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: cannot parse {value:?}")]
    Value { line: usize, value: String },
    #[error("line {line}: observed value after NA")]
    Gap { line: usize },
}

pub fn export_player_file(account: &PlayerAccount) -> String {
    let mut out = String::with_capacity(64 * (account.runs.len() + 1));
    out.push_str(EXPORT_HEADER);
    out.push('\n');
    for run in account.runs.iter().rev() {
        write!(out, "{}", run.week).unwrap();
        for x in run.point.to_array() {
            write!(out, ",{x}").unwrap();
        }
        for slot in 0..MAX_REPS as usize {
            match run.yields.get(slot) {
                Some(y) => write!(out, ",{y}").unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

/// Parses an export (comma or whitespace delimited) into rows in file order.
pub fn parse_export(text: &str) -> Result<Vec<ExportRow>, ExportError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(ExportError::Header)?;
    let comma = header.contains(',');
    let split = |l: &str| -> Vec<String> {
        if comma {
            l.split(',').map(|f| f.trim().to_string()).collect()
        } else {
            l.split_whitespace().map(str::to_string).collect()
        }
    };
    if split(header) != split(&EXPORT_HEADER.replace(',', if comma { "," } else { " " })) {
        return Err(ExportError::Header);
    }
    lines
        .map(|(i, l)| {
            let line = i + 1;
            let fields = split(l);
            if fields.len() != COLUMNS {
                return Err(ExportError::FieldCount { line, found: fields.len() });
            }
            let bad = |v: &str| ExportError::Value { line, value: v.to_string() };
            let week = fields[0].parse::<u32>().map_err(|_| bad(&fields[0]))?;
            let mut coords = [0.0; NUM_INPUTS];
            for (slot, f) in coords.iter_mut().zip(&fields[1..=NUM_INPUTS]) {
                *slot = f.parse::<f64>().map_err(|_| bad(f))?;
            }
            let mut yields = Vec::new();
            let mut seen_na = false;
            for f in &fields[1 + NUM_INPUTS..] {
                if f == "NA" {
                    seen_na = true;
                } else if seen_na {
                    return Err(ExportError::Gap { line });
                } else {
                    yields.push(f.parse::<f64>().map_err(|_| bad(f))?);
                }
            }
            Ok(ExportRow {
                week,
                point: InputPoint::from_array(coords),
                yields,
            })
        })
        .collect()
}

/// Budget spent according to an export; week-0 rows are free.
pub fn spend_from_export(rows: &[ExportRow]) -> i64 {
    rows.iter()
        .filter(|r| r.week >= 1)
        .map(|r| replicate_cost(r.yields.len() as u32).unwrap_or(0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Game, GameConfig, Token};
    use proptest::prelude::*;

    fn game_with_runs() -> (Game, Token) {
        let mut g = Game::new(GameConfig::with_seed(4));
        g.provision("jh1234").unwrap();
        g.advance_week();
        let t = Token::parse("jh1234").unwrap();
        g.execute_run(&t, &InputPoint::splat(3.0), 3).unwrap();
        g.advance_week();
        g.execute_run(&t, &InputPoint::from_array([1.5, 2.0, 9.0, 0.25, 3.0, 11.0, 4.0]), 10)
            .unwrap();
        (g, t)
    }

    #[test]
    fn fresh_account_exports_initial_design() {
        let mut g = Game::new(GameConfig::default());
        let acc = g.provision("ab1234").unwrap().clone();
        let text = export_player_file(&acc);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], EXPORT_HEADER);
        assert_eq!(lines.len(), 8);
        for l in &lines[1..] {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 18);
            assert_eq!(f[0], "0");
            assert!(f[8..13].iter().all(|v| *v != "NA"));
            assert!(f[13..].iter().all(|v| *v == "NA"));
        }
    }

    #[test]
    fn newest_first_with_na_fill() {
        let (g, t) = game_with_runs();
        let acc = g.account(&t).unwrap();
        let rows = parse_export(&export_player_file(acc)).unwrap();
        assert_eq!(rows.len(), acc.runs.len());
        assert_eq!(rows[0].week, 2);
        assert_eq!(rows[0].yields.len(), 10);
        assert_eq!(rows[1].yields.len(), 3);
        let text = export_player_file(acc);
        let second: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        assert!(second[11..].iter().all(|v| *v == "NA"));
        for (row, run) in rows.iter().zip(acc.runs.iter().rev()) {
            assert_eq!(row.point, run.point);
            assert_eq!(row.yields, run.yields);
            assert_eq!(row.week, run.week);
        }
        assert_eq!(spend_from_export(&rows), acc.spent());
    }

    #[test]
    fn whitespace_variant_parses() {
        let (g, t) = game_with_runs();
        let text = export_player_file(g.account(&t).unwrap()).replace(',', "  ");
        assert_eq!(parse_export(&text).unwrap().len(), 9);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_export(""), Err(ExportError::Header));
        assert_eq!(parse_export("week,N\n"), Err(ExportError::Header));
        let short = format!("{EXPORT_HEADER}\n1,2,3\n");
        assert_eq!(parse_export(&short), Err(ExportError::FieldCount { line: 2, found: 3 }));
        let gap = format!("{EXPORT_HEADER}\n1,1,1,1,1,1,1,1,NA,5,NA,NA,NA,NA,NA,NA,NA,NA\n");
        assert_eq!(parse_export(&gap), Err(ExportError::Gap { line: 2 }));
    }

    proptest! {
        #[test]
        fn numbers_survive_the_text_round_trip(
            coords in proptest::array::uniform7(1e-300f64..1e300),
            yields in proptest::collection::vec(-1e6f64..1e6, 1..=10),
        ) {
            let mut acc = Game::new(GameConfig::default()).provision("zz0000").unwrap().clone();
            acc.runs.clear();
            acc.runs.push(crate::engine::RunRecord {
                run_id: 1, week: 5, point: InputPoint::from_array(coords),
                reps: yields.len() as u32, cost: 0, yields: yields.clone(), true_yield: 1.0,
            });
            let rows = parse_export(&export_player_file(&acc)).unwrap();
            prop_assert_eq!(rows[0].point.to_array(), coords);
            prop_assert_eq!(&rows[0].yields, &yields);
        }
    }
}
