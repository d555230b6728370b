use crate::ols::{fit_ols, LinearFit};
use crate::terms::Term;
use crate::RsmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepwiseOptions {
    /// Keep a main effect while any surviving interaction or square uses it.
    pub enforce_hierarchy: bool,
}

impl Default for StepwiseOptions {
    fn default() -> Self {
        Self {
            enforce_hierarchy: true,
        }
    }
}

/// Backward elimination: drop the single term whose removal lowers BIC the
/// most, until no removal lowers it. The intercept is never dropped.
pub fn stepwise_bic_backward(fit: &LinearFit, options: StepwiseOptions) -> Result<LinearFit, RsmError> {
    let mut current = fit.clone();
    loop {
        let mut best: Option<LinearFit> = None;
        for (i, term) in current.terms.iter().enumerate() {
            if *term == Term::Intercept {
                continue;
            }
            if options.enforce_hierarchy && current.terms.iter().any(|o| term.is_contained_in(o)) {
                continue;
            }
            let mut reduced = current.terms.clone();
            reduced.remove(i);
            let candidate = fit_ols(current.data(), &reduced)?;
            if best.as_ref().is_none_or(|b| candidate.bic < b.bic) {
                best = Some(candidate);
            }
        }
        match best {
            Some(b) if b.bic < current.bic => current = b,
            _ => return Ok(current),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::terms::{first_order, second_order};
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::sync::Arc;
    use yieldgame_core::GameRng;

    fn noisy(seed: u64, f: impl Fn(&[f64]) -> f64) -> Arc<Dataset> {
        let mut rng = GameRng::new(seed, 0);
        let inputs: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let y = inputs.iter().map(|x| f(x) + 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        Arc::new(Dataset::unnamed(inputs, y))
    }

    #[test]
    fn keeps_real_effects_drops_decoys() {
        let data = noisy(9, |x| 1.0 + 2.0 * x[0] - 1.5 * x[2]);
        let full = fit_ols(&data, &first_order(&[0, 1, 2, 3])).unwrap();
        let reduced = stepwise_bic_backward(&full, StepwiseOptions::default()).unwrap();
        assert_eq!(reduced.terms, vec![Term::Intercept, Term::Main(0), Term::Main(2)]);
        assert!(reduced.bic <= full.bic);
    }

    #[test]
    fn pure_noise_mostly_selects_intercept_only() {
        let hits = (0..50)
            .filter(|&s| {
                let data = noisy(100 + s, |_| 0.0);
                let full = fit_ols(&data, &first_order(&[0, 1, 2, 3])).unwrap();
                stepwise_bic_backward(&full, StepwiseOptions::default()).unwrap().terms == vec![Term::Intercept]
            })
            .count();
        assert!(hits > 25, "{hits}/50");
    }

    #[test]
    fn hierarchy_protects_main_effects() {
        // Pure interaction: x0 and x1 mains carry nothing on their own.
        let data = noisy(4, |x| 3.0 * x[0] * x[1]);
        let terms = crate::terms::with_interactions(&first_order(&[0, 1]), &[0, 1]);
        let full = fit_ols(&data, &terms).unwrap();
        let strict = stepwise_bic_backward(&full, StepwiseOptions { enforce_hierarchy: true }).unwrap();
        assert!(strict.terms.contains(&Term::Main(0)) && strict.terms.contains(&Term::Main(1)));
        let loose = stepwise_bic_backward(&full, StepwiseOptions { enforce_hierarchy: false }).unwrap();
        assert!(loose.terms.contains(&Term::Interaction(0, 1)));
        assert!(loose.bic <= strict.bic);
    }

    #[test]
    fn output_never_worse_and_subset_of_input() {
        for seed in 0..10 {
            let data = noisy(seed, |x| x[0] - x[1] * x[1] + 0.5 * x[3]);
            let full = fit_ols(&data, &second_order(&[0, 1, 2, 3])).unwrap();
            let out = stepwise_bic_backward(&full, StepwiseOptions::default()).unwrap();
            assert!(out.bic <= full.bic);
            assert!(out.terms.iter().all(|t| full.terms.contains(t)));
            assert!(out.terms.contains(&Term::Intercept));
        }
    }
}
