//! Gaussian-process surrogate modelling for sequential design.
//!
//! [`GpModel`] is fit by marginal likelihood with replicates handled in
//! closed form, [`suggest_next`] maximizes expected improvement (in the
//! minimization orientation; negate responses to maximize), [`sensitivity`]
//! computes Sobol indices and partial dependence of any surface, and
//! [`variance_over_time`] recovers a periodic noise schedule from replicate
//! spread.

mod ei;
mod model;
mod normal;
mod optim;
mod sensitivity;
mod suggest;
mod variance;

pub use ei::expected_improvement;
pub use model::{GpConfig, GpError, GpModel, Hyperparameters, Prediction};
pub use normal::{norm_cdf, norm_pdf};
pub use optim::{minimize_bounded, Minimum};
pub use sensitivity::{partial_dependence, sensitivity, sobol_indices, PartialDependence, Sensitivity, SensitivityConfig, SobolIndices};
pub use suggest::{suggest_next, Acquisition, SuggestConfig, Suggestion};
pub use variance::{variance_over_time, SinusoidFit, VarianceOverTime, WeekVariance, VARIANCE_PERIOD_WEEKS};
