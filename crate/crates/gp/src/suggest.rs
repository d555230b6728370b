use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use yieldgame_core::design::latin_hypercube;
use yieldgame_core::{InputPoint, NUM_INPUTS};

use crate::ei::expected_improvement;
use crate::model::GpModel;
use crate::optim::minimize_bounded;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    ExpectedImprovement,
    MeanOptimization,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuggestConfig {
    pub mode: Acquisition,
    /// Size of the LHS used for the incumbent and for picking starts.
    pub candidates: usize,
    pub starts: usize,
    pub max_iters: u64,
    pub max_reps: u32,
    pub seed: u64,
}

impl Default for SuggestConfig {
    fn default() -> Self {
        Self {
            mode: Acquisition::ExpectedImprovement,
            candidates: 2000,
            starts: 10,
            max_iters: 300,
            max_reps: 10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Suggestion {
    pub x: Vec<f64>,
    pub kind: Acquisition,
    /// EI at `x`, or the predictive mean for mean optimization.
    pub acquisition: f64,
    /// Smallest predictive mean over the candidate set and training sites.
    pub incumbent: f64,
    pub mean: f64,
    pub sd: f64,
    /// Replicates needed for the noise variance to fall to the current
    /// latent variance at `x`.
    pub recommended_reps: u32,
    /// EI was requested but the model has no predictive spread.
    pub fell_back: bool,
}

impl Suggestion {
    pub fn input_point(&self) -> Option<InputPoint> {
        (self.x.len() == NUM_INPUTS).then(|| InputPoint::from_slice(&self.x))
    }
}

/// Next run for a minimization problem: maximizer of expected improvement
/// below the predictive-mean incumbent, or minimizer of the mean.
pub fn suggest_next(model: &GpModel, training: &[Vec<f64>], bounds: &[(f64, f64)], config: &SuggestConfig) -> Suggestion {
    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let cands = latin_hypercube(config.candidates.max(1), bounds, &mut rng);
    let preds: Vec<_> = cands.iter().map(|c| model.predict(c)).collect();
    let incumbent = preds
        .iter()
        .map(|p| p.mean)
        .chain(training.iter().map(|t| model.predict_mean(t)))
        .fold(f64::INFINITY, f64::min);

    let spread = preds.iter().map(|p| p.sd).fold(0.0, f64::max);
    let degenerate = spread <= 1e-10 * model.response_scale();
    let kind = if config.mode == Acquisition::ExpectedImprovement && !degenerate {
        Acquisition::ExpectedImprovement
    } else {
        Acquisition::MeanOptimization
    };
    let objective = |x: &[f64]| match kind {
        Acquisition::ExpectedImprovement => {
            let p = model.predict(x);
            -expected_improvement(p.mean, p.sd, incumbent)
        }
        Acquisition::MeanOptimization => model.predict_mean(x),
    };
    let mut scored: Vec<(f64, usize)> = cands
        .iter()
        .zip(&preds)
        .enumerate()
        .map(|(i, (_, p))| {
            let v = match kind {
                Acquisition::ExpectedImprovement => -expected_improvement(p.mean, p.sd, incumbent),
                Acquisition::MeanOptimization => p.mean,
            };
            (v, i)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = None::<(Vec<f64>, f64)>;
    for &(_, i) in scored.iter().take(config.starts.max(1)) {
        let m = minimize_bounded(&objective, &cands[i], &lo, &hi, 0.05, config.max_iters);
        if best.as_ref().is_none_or(|b| m.value < b.1) {
            best = Some((m.x, m.value));
        }
    }
    let (x, value) = best.expect("at least one start");
    let p = model.predict(&x);
    let latent = p.sd * p.sd;
    let noise = model.noise_variance();
    let reps = if latent > 0.0 { (noise / latent).ceil() } else { f64::INFINITY };
    let recommended_reps = reps.clamp(1.0, config.max_reps.max(1) as f64) as u32;
    Suggestion {
        x,
        kind,
        acquisition: match kind {
            Acquisition::ExpectedImprovement => -value,
            Acquisition::MeanOptimization => value,
        },
        incumbent,
        mean: p.mean,
        sd: p.sd,
        recommended_reps,
        fell_back: kind != config.mode,
    }
}
