//! Best-so-far progress series for every player.
//!
//! De-noised views rank runs by the noise-free yield at their input and
//! divide by the best such value across all players, so only ratios are
//! ever published. Raw views use each run's mean observed yield on the
//! original scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{Game, RunRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ByWeek,
    ByRun,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Denoised,
    Raw,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct View {
    pub axis: Axis,
    pub scale: Scale,
}

impl View {
    pub const ALL: [View; 4] = [
        View { axis: Axis::ByWeek, scale: Scale::Denoised },
        View { axis: Axis::ByRun, scale: Scale::Denoised },
        View { axis: Axis::ByWeek, scale: Scale::Raw },
        View { axis: Axis::ByRun, scale: Scale::Raw },
    ];
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::ByWeek => "by_week",
            Axis::ByRun => "by_run",
        };
        let scale = match self.scale {
            Scale::Denoised => "denoised",
            Scale::Raw => "raw",
        };
        write!(f, "{axis}_{scale}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown leaderboard view {0:?}")]
pub struct UnknownView(pub String);

/// Accepts `by_week`, `by_run` (de-noised) and the explicit
/// `{by_week,by_run}_{denoised,raw}` names.
impl FromStr for View {
    type Err = UnknownView;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (axis, rest) = if let Some(rest) = s.strip_prefix("by_week") {
            (Axis::ByWeek, rest)
        } else if let Some(rest) = s.strip_prefix("by_run") {
            (Axis::ByRun, rest)
        } else {
            return Err(UnknownView(s.to_string()));
        };
        let scale = match rest {
            "" | "_denoised" => Scale::Denoised,
            "_raw" => Scale::Raw,
            _ => return Err(UnknownView(s.to_string())),
        };
        Ok(View { axis, scale })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: u32,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardSeries {
    /// Player initials; the PIN is never included.
    pub label: String,
    pub points: Vec<SeriesPoint>,
}

/// Running maximum, element by element.
pub fn running_max(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    values
        .into_iter()
        .map(|v| {
            best = best.max(v);
            best
        })
        .collect()
}

fn run_value(r: &RunRecord, scale: Scale) -> f64 {
    match scale {
        Scale::Denoised => r.true_yield,
        Scale::Raw => r.mean_yield(),
    }
}

/// Unnormalized best-so-far series for one history.
///
/// By run, `x` is the 1-based position in the history (initial design
/// included). By week, `x` runs over play weeks `1..=through_week` and each
/// value is the best over everything recorded up to the end of that week.
pub fn progress_series(runs: &[RunRecord], axis: Axis, scale: Scale, through_week: u32) -> Vec<SeriesPoint> {
    match axis {
        Axis::ByRun => running_max(runs.iter().map(|r| run_value(r, scale)))
            .into_iter()
            .enumerate()
            .map(|(i, value)| SeriesPoint { x: i as u32 + 1, value })
            .collect(),
        Axis::ByWeek => (1..=through_week)
            .filter_map(|week| {
                runs.iter()
                    .filter(|r| r.week <= week)
                    .map(|r| run_value(r, scale))
                    .reduce(f64::max)
                    .map(|value| SeriesPoint { x: week, value })
            })
            .collect(),
    }
}

/// All players' series for `view`, in token order.
pub fn leaderboard(game: &Game, view: View) -> Vec<LeaderboardSeries> {
    let histories: Vec<(&str, &[RunRecord])> = game
        .accounts
        .values()
        .map(|a| (a.token.initials(), a.runs.as_slice()))
        .collect();
    build(&histories, view, game.clock.current_week)
}

pub fn build(histories: &[(&str, &[RunRecord])], view: View, through_week: u32) -> Vec<LeaderboardSeries> {
    let normalizer = histories
        .iter()
        .flat_map(|(_, runs)| runs.iter().map(|r| r.true_yield))
        .fold(f64::NEG_INFINITY, f64::max);
    histories
        .iter()
        .map(|(label, runs)| {
            let mut points = progress_series(runs, view.axis, view.scale, through_week);
            if view.scale == Scale::Denoised {
                for p in &mut points {
                    p.value /= normalizer;
                }
            }
            LeaderboardSeries {
                label: label.to_string(),
                points,
            }
        })
        .collect()
}
