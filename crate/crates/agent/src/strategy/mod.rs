//! Scripted players.
//!
//! A strategy sees the exported history at the start of each week and the
//! result of every run it submits afterwards. It never sees the budget
//! directly beyond the [`Status`] snapshot the runner passes in; gating and
//! spend policy are the runner's job.

mod classical;
mod ei;
mod replicator;

pub use classical::{ClassicalAgent, ClassicalOptions};
pub use ei::{EiAgent, EiOptions};
pub use replicator::{ReplicatorAgent, ReplicatorOptions};

use thiserror::Error;
use yieldgame_core::store::ExportRow;
use yieldgame_core::{InputPoint, NUM_INPUTS};
use yieldgame_gp::GpError;
use yieldgame_rsm::RsmError;
use yieldgame_server::api::{PlayerRun, Status};

use crate::config::{StrategyConfig, StrategyKind};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Rsm(#[from] RsmError),
    #[error("{0}")]
    Config(String),
}

/// A run the strategy wants next.
#[derive(Clone, Debug, PartialEq)]
pub struct Planned {
    pub point: InputPoint,
    pub reps: u32,
    /// Acquisition value at `point`, where the strategy has one.
    pub acquisition: Option<f64>,
    pub note: String,
}

pub trait Strategy {
    fn kind(&self) -> StrategyKind;

    /// Resets the strategy's view of the data; `history` is chronological
    /// and includes the initial design.
    fn begin_week(&mut self, week: u32, total_weeks: u32, history: &[ExportRow]) -> Result<(), StrategyError>;

    /// `None` ends the week early.
    fn next_run(&mut self, status: &Status) -> Result<Option<Planned>, StrategyError>;

    fn observe(&mut self, run: &PlayerRun);
}

pub fn build(config: &StrategyConfig) -> Result<Box<dyn Strategy + Send>, StrategyError> {
    config.validate().map_err(StrategyError::Config)?;
    Ok(match config.strategy {
        StrategyKind::Classical => Box::new(ClassicalAgent::new(config.clone(), ClassicalOptions::default())),
        StrategyKind::Ei => Box::new(EiAgent::new(config.clone(), EiOptions::default())),
        StrategyKind::Replicator => Box::new(ReplicatorAgent::new(config.clone(), ReplicatorOptions::default())),
    })
}

/// A run as the strategies see it.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Obs {
    pub week: u32,
    pub x: Vec<f64>,
    pub yields: Vec<f64>,
}

impl Obs {
    pub fn mean(&self) -> f64 {
        self.yields.iter().sum::<f64>() / self.yields.len() as f64
    }
}

impl From<&ExportRow> for Obs {
    fn from(r: &ExportRow) -> Self {
        Self {
            week: r.week,
            x: r.point.to_array().to_vec(),
            yields: r.yields.clone(),
        }
    }
}

impl From<&PlayerRun> for Obs {
    fn from(r: &PlayerRun) -> Self {
        Self {
            week: r.week,
            x: r.point.to_array().to_vec(),
            yields: r.yields.clone(),
        }
    }
}

/// Index of the run with the highest mean yield.
pub(crate) fn best_index(obs: &[Obs]) -> Option<usize> {
    obs.iter()
        .enumerate()
        .max_by(|a, b| a.1.mean().total_cmp(&b.1.mean()))
        .map(|(i, _)| i)
}

pub(crate) fn clamp_to(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Box of half-width `half` around `center`, intersected with `bounds`.
/// A side squeezed to nothing is reopened inward from the bound it hit.
pub(crate) fn local_box(center: &[f64], half: &[f64], bounds: &[(f64, f64)]) -> Vec<(f64, f64)> {
    center
        .iter()
        .zip(half)
        .zip(bounds)
        .map(|((c, h), (lo, hi))| {
            let a = (c - h).max(*lo);
            let b = (c + h).min(*hi);
            if b - a > 1e-9 {
                (a, b)
            } else if (c - lo).abs() < (hi - c).abs() {
                (*lo, (*lo + 2.0 * h).min(*hi))
            } else {
                ((*hi - 2.0 * h).max(*lo), *hi)
            }
        })
        .collect()
}

pub(crate) fn to_point(x: &[f64]) -> InputPoint {
    debug_assert_eq!(x.len(), NUM_INPUTS);
    InputPoint::from_slice(x)
}
