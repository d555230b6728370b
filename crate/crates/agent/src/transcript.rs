//! Season transcripts: one row per week boundary, suggestion, run and
//! rejection.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use yieldgame_core::InputPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    WeekStart,
    Suggestion,
    Run,
    /// The server refused a submitted run.
    Rejected,
    /// The spend policy held back a planned run.
    Held,
    /// The strategy failed; the week ends.
    Error,
    WeekEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TranscriptRow {
    pub week: u32,
    pub event: Event,
    pub strategy: String,
    pub player: String,
    pub N: Option<f64>,
    pub P: Option<f64>,
    pub K: Option<f64>,
    pub Na: Option<f64>,
    pub Ca: Option<f64>,
    pub Mg: Option<f64>,
    pub Nx: Option<f64>,
    pub reps: Option<u32>,
    pub cost: Option<i64>,
    pub balance_after: Option<i64>,
    pub mean_yield: Option<f64>,
    pub acquisition: Option<f64>,
    pub note: String,
}

impl TranscriptRow {
    pub fn new(week: u32, event: Event, strategy: &str, player: &str) -> Self {
        Self {
            week,
            event,
            strategy: strategy.to_string(),
            player: player.to_string(),
            N: None,
            P: None,
            K: None,
            Na: None,
            Ca: None,
            Mg: None,
            Nx: None,
            reps: None,
            cost: None,
            balance_after: None,
            mean_yield: None,
            acquisition: None,
            note: String::new(),
        }
    }

    pub fn with_point(mut self, p: &InputPoint) -> Self {
        let [n, pp, k, na, ca, mg, nx] = p.to_array();
        self.N = Some(n);
        self.P = Some(pp);
        self.K = Some(k);
        self.Na = Some(na);
        self.Ca = Some(ca);
        self.Mg = Some(mg);
        self.Nx = Some(nx);
        self
    }

    pub fn point(&self) -> Option<InputPoint> {
        Some(InputPoint::from_array([self.N?, self.P?, self.K?, self.Na?, self.Ca?, self.Mg?, self.Nx?]))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub rows: Vec<TranscriptRow>,
}

impl Transcript {
    pub fn push(&mut self, row: TranscriptRow) {
        self.rows.push(row);
    }

    pub fn runs(&self) -> impl Iterator<Item = &TranscriptRow> {
        self.rows.iter().filter(|r| r.event == Event::Run)
    }

    pub fn total_cost(&self) -> i64 {
        self.runs().filter_map(|r| r.cost).sum()
    }

    pub fn count(&self, event: Event) -> usize {
        self.rows.iter().filter(|r| r.event == event).count()
    }

    pub fn max_week(&self) -> u32 {
        self.rows.iter().map(|r| r.week).max().unwrap_or(0)
    }

    pub fn extend(&mut self, other: Transcript) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), csv::Error> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, csv::Error> {
        let rows = csv::Reader::from_reader(r).deserialize().collect::<Result<_, _>>()?;
        Ok(Self { rows })
    }
}
