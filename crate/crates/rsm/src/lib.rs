//! Low-order polynomial response surfaces.
//!
//! The usual first pass over a fresh data set: fit a first-order model,
//! prune it by backward stepwise BIC, climb the fitted plane along steepest
//! ascent, then fit a second-order model and read off its canonical form
//! and ridge trace.

mod ascent;
mod data;
mod ols;
mod ridge;
mod stepwise;
mod terms;

pub use ascent::{ascent_direction, steepest_ascent_path, steepest_ascent_path_lhs_fill, AscentPoint};
pub use data::{Coding, Dataset};
pub use ols::{aliased_terms, fit_ols, fit_ols_dropping_aliased, LinearFit};
pub use ridge::{ridge_analysis, QuadraticCanonical, RidgePoint, StationaryKind};
pub use stepwise::{stepwise_bic_backward, StepwiseOptions};
pub use terms::{first_order, second_order, with_interactions, Term};

/// Latin hypercube designs (shared with game seeding).
pub mod lhs {
    pub use yieldgame_core::design::{latin_hypercube, maximin_latin_hypercube, min_pairwise_distance};
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RsmError {
    #[error("design matrix is rank deficient; aliased terms: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("need more observations ({n}) than coefficients ({k})")]
    TooFewObservations { n: usize, k: usize },
    #[error("fit contains quadratic terms; steepest ascent needs a first-order model")]
    NotFirstOrder,
    #[error("fit has no quadratic terms; ridge analysis needs a second-order model")]
    NotSecondOrder,
    #[error("fitted gradient is zero; no ascent direction")]
    NoDirection,
    #[error("x0 has {found} coordinates, data has {expected}")]
    Dimension { expected: usize, found: usize },
}
