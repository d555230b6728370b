use crate::normal::{norm_cdf, norm_pdf};

/// Expected improvement below `f_min` of a normal variable with mean `mu`
/// and standard deviation `sigma`:
/// `(f_min - mu) * Phi(z) + sigma * phi(z)`, `z = (f_min - mu) / sigma`.
pub fn expected_improvement(mu: f64, sigma: f64, f_min: f64) -> f64 {
    let gap = f_min - mu;
    if sigma <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sigma;
    (gap * norm_cdf(z) + sigma * norm_pdf(z)).max(0.0)
}
