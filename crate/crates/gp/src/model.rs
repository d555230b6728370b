use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;
use yieldgame_core::design::latin_hypercube;

use crate::optim::minimize_bounded;

const JITTER_LADDER: [f64; 6] = [0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("invalid training data: {0}")]
    Input(String),
    #[error("covariance not positive definite even with jitter {jitter:e} (nugget {nugget:e})")]
    Conditioning { jitter: f64, nugget: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpConfig {
    pub starts: usize,
    /// Bounds on each `theta` in `exp(-sum d_k^2 / theta_k)` on the unit cube.
    pub theta_bounds: (f64, f64),
    /// Bounds on the nugget, relative to the signal variance.
    pub nugget_bounds: (f64, f64),
    /// Hold the nugget fixed instead of estimating it.
    pub fixed_nugget: Option<f64>,
    pub max_iters: u64,
    pub seed: u64,
    /// Box mapped to the unit cube; defaults to the range of the data.
    pub input_bounds: Option<Vec<(f64, f64)>>,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            theta_bounds: (1e-3, 50.0),
            nugget_bounds: (1e-12, 10.0),
            fixed_nugget: None,
            max_iters: 400,
            seed: 0,
            input_bounds: None,
        }
    }
}

/// Kernel parameters in standardized response units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hyperparameters {
    pub theta: Vec<f64>,
    pub nugget: f64,
    /// Profiled signal variance.
    pub tau2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub mean: f64,
    /// Standard deviation of the latent surface (noise excluded).
    pub sd: f64,
}

/// Unique design sites with replicate counts and standardized responses.
#[derive(Clone, Debug)]
struct Sites {
    u: Vec<Vec<f64>>,
    counts: Vec<f64>,
    means: DVector<f64>,
    ss_within: f64,
    n_obs: usize,
}

struct Factor {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    tau2: f64,
    log_likelihood: f64,
    jitter: f64,
}

/// Fitted GP with anisotropic squared-exponential kernel and nugget.
#[derive(Clone, Debug)]
pub struct GpModel {
    bounds: Vec<(f64, f64)>,
    y_mean: f64,
    y_scale: f64,
    sites: Sites,
    hyper: Hyperparameters,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
    log_likelihood: f64,
    start_log_likelihoods: Vec<f64>,
}

fn kernel(a: &[f64], b: &[f64], theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let d = a[k] - b[k];
        s += d * d / theta[k];
    }
    (-s).exp()
}

fn factor(sites: &Sites, theta: &[f64], nugget: f64) -> Option<Factor> {
    let n = sites.u.len();
    let mut m = DMatrix::from_fn(n, n, |i, j| kernel(&sites.u[i], &sites.u[j], theta));
    for i in 0..n {
        m[(i, i)] += nugget / sites.counts[i];
    }
    for jitter in JITTER_LADDER {
        let mut mj = m.clone();
        for i in 0..n {
            mj[(i, i)] += jitter;
        }
        let Some(chol) = mj.clone().cholesky() else { continue };
        let mut alpha = chol.solve(&sites.means);
        // One step of iterative refinement; near-interpolating fits are badly
        // conditioned.
        let resid = &sites.means - &mj * &alpha;
        alpha += chol.solve(&resid);
        let nf = sites.n_obs as f64;
        let quad = sites.ss_within / nugget + sites.means.dot(&alpha);
        let tau2 = (quad / nf).max(f64::MIN_POSITIVE);
        let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
            + (nf - n as f64) * nugget.ln()
            + sites.counts.iter().map(|r| r.ln()).sum::<f64>();
        let log_likelihood = -0.5 * nf * (2.0 * std::f64::consts::PI * tau2).ln() - 0.5 * log_det - 0.5 * nf;
        if !log_likelihood.is_finite() {
            return None;
        }
        return Some(Factor {
            chol,
            alpha,
            tau2,
            log_likelihood,
            jitter,
        });
    }
    None
}

impl GpModel {
    /// Maximum-likelihood fit. Repeated rows are treated as replicates.
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &GpConfig) -> Result<Self, GpError> {
        let (bounds, y_mean, y_scale, sites) = prepare(x, y, config)?;
        let d = bounds.len();
        let (tl, th) = config.theta_bounds;
        let (gl, gh) = config.nugget_bounds;
        let mut lo = vec![tl.ln(); d];
        let mut hi = vec![th.ln(); d];
        if config.fixed_nugget.is_none() {
            lo.push(gl.ln());
            hi.push(gh.ln());
        }
        let unpack = |p: &[f64]| -> (Vec<f64>, f64) {
            let theta = p[..d].iter().map(|v| v.exp()).collect();
            let g = config.fixed_nugget.unwrap_or_else(|| p[d].exp());
            (theta, g)
        };
        let objective = |p: &[f64]| {
            let (theta, g) = unpack(p);
            factor(&sites, &theta, g).map_or(f64::INFINITY, |f| -f.log_likelihood)
        };
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let box_bounds: Vec<(f64, f64)> = lo.iter().copied().zip(hi.iter().copied()).collect();
        let starts = latin_hypercube(config.starts.max(1), &box_bounds, &mut rng);
        let mut start_log_likelihoods = Vec::with_capacity(starts.len());
        let mut best: Option<(Vec<f64>, f64)> = None;
        for s in &starts {
            start_log_likelihoods.push(-objective(s));
            let m = minimize_bounded(&objective, s, &lo, &hi, 0.1, config.max_iters);
            if best.as_ref().is_none_or(|(_, v)| m.value < *v) {
                best = Some((m.x, m.value));
            }
        }
        let (p, _) = best.expect("at least one start");
        let (theta, g) = unpack(&p);
        let mut model = Self::build(bounds, y_mean, y_scale, sites, theta, g)?;
        model.start_log_likelihoods = start_log_likelihoods;
        Ok(model)
    }

    /// Fit with kernel parameters held fixed; only the signal variance is
    /// re-profiled.
    pub fn fit_fixed(x: &[Vec<f64>], y: &[f64], theta: &[f64], nugget: f64, input_bounds: Option<Vec<(f64, f64)>>) -> Result<Self, GpError> {
        let config = GpConfig {
            input_bounds,
            ..GpConfig::default()
        };
        let (bounds, y_mean, y_scale, sites) = prepare(x, y, &config)?;
        if theta.len() != bounds.len() {
            return Err(GpError::Input(format!("{} lengthscales for {} inputs", theta.len(), bounds.len())));
        }
        Self::build(bounds, y_mean, y_scale, sites, theta.to_vec(), nugget)
    }

    fn build(bounds: Vec<(f64, f64)>, y_mean: f64, y_scale: f64, sites: Sites, theta: Vec<f64>, nugget: f64) -> Result<Self, GpError> {
        let f = factor(&sites, &theta, nugget).ok_or(GpError::Conditioning {
            jitter: *JITTER_LADDER.last().unwrap(),
            nugget,
        })?;
        Ok(Self {
            bounds,
            y_mean,
            y_scale,
            sites,
            hyper: Hyperparameters {
                theta,
                nugget,
                tau2: f.tau2,
            },
            chol: f.chol,
            alpha: f.alpha,
            jitter: f.jitter,
            log_likelihood: f.log_likelihood,
            start_log_likelihoods: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn input_bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    /// Log-likelihood at each multi-start initialization.
    pub fn start_log_likelihoods(&self) -> &[f64] {
        &self.start_log_likelihoods
    }

    /// Diagonal jitter that was needed on top of the nugget.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn n_observations(&self) -> usize {
        self.sites.n_obs
    }

    pub fn n_unique(&self) -> usize {
        self.sites.u.len()
    }

    pub fn prior_mean(&self) -> f64 {
        self.y_mean
    }

    /// Standard deviation of the training responses (1 if they are constant).
    pub fn response_scale(&self) -> f64 {
        self.y_scale
    }

    pub fn prior_sd(&self) -> f64 {
        self.y_scale * self.hyper.tau2.sqrt()
    }

    /// Observation noise variance in response units.
    pub fn noise_variance(&self) -> f64 {
        self.y_scale * self.y_scale * self.hyper.tau2 * self.hyper.nugget
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        to_unit(x, &self.bounds)
    }

    fn k_vec(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.sites.u.len(), self.sites.u.iter().map(|s| kernel(u, s, &self.hyper.theta)))
    }

    pub fn predict_mean(&self, x: &[f64]) -> f64 {
        let k = self.k_vec(&self.to_unit(x));
        self.y_mean + self.y_scale * k.dot(&self.alpha)
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        let k = self.k_vec(&self.to_unit(x));
        let mean = self.y_mean + self.y_scale * k.dot(&self.alpha);
        let v = self.chol.l_dirty().solve_lower_triangular(&k).expect("triangular factor");
        let var = (self.hyper.tau2 * (1.0 - v.norm_squared())).max(0.0);
        Prediction {
            mean,
            sd: self.y_scale * var.sqrt(),
        }
    }

    /// Analytic gradient of the predictive mean in natural units.
    pub fn mean_gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.to_unit(x);
        let mut g = vec![0.0; u.len()];
        for (site, a) in self.sites.u.iter().zip(self.alpha.iter()) {
            let w = a * kernel(&u, site, &self.hyper.theta);
            for k in 0..u.len() {
                g[k] -= w * 2.0 * (u[k] - site[k]) / self.hyper.theta[k];
            }
        }
        g.iter()
            .zip(&self.bounds)
            .map(|(v, (lo, hi))| self.y_scale * v / (hi - lo))
            .collect()
    }
}

fn to_unit(x: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter().zip(bounds).map(|(v, (lo, hi))| (v - lo) / (hi - lo)).collect()
}

fn prepare(x: &[Vec<f64>], y: &[f64], config: &GpConfig) -> Result<(Vec<(f64, f64)>, f64, f64, Sites), GpError> {
    if x.is_empty() {
        return Err(GpError::Input("no observations".into()));
    }
    if x.len() != y.len() {
        return Err(GpError::Input(format!("{} inputs but {} responses", x.len(), y.len())));
    }
    let d = x[0].len();
    if d == 0 || x.iter().any(|r| r.len() != d) {
        return Err(GpError::Input("ragged or empty input rows".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(GpError::Input("non-finite value".into()));
    }
    let bounds = match &config.input_bounds {
        Some(b) if b.len() != d => return Err(GpError::Input(format!("{} bounds for {d} inputs", b.len()))),
        Some(b) if b.iter().any(|(lo, hi)| !(hi > lo)) => return Err(GpError::Input("empty input bound".into())),
        Some(b) => b.clone(),
        None => (0..d)
            .map(|j| {
                let lo = x.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
                let hi = x.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    (lo, hi)
                } else {
                    (lo - 0.5, lo + 0.5)
                }
            })
            .collect(),
    };
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let var = if y.len() > 1 {
        y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };

    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut u: Vec<Vec<f64>> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (row, v) in x.iter().zip(y) {
        let key: Vec<u64> = row.iter().map(|c| c.to_bits()).collect();
        let i = *index.entry(key).or_insert_with(|| {
            u.push(to_unit(row, &bounds));
            groups.push(Vec::new());
            u.len() - 1
        });
        groups[i].push((v - y_mean) / y_scale);
    }
    let counts: Vec<f64> = groups.iter().map(|g| g.len() as f64).collect();
    let means = DVector::from_iterator(groups.len(), groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64));
    let ss_within = groups
        .iter()
        .zip(means.iter())
        .map(|(g, m)| g.iter().map(|v| (v - m).powi(2)).sum::<f64>())
        .sum();
    Ok((
        bounds,
        y_mean,
        y_scale,
        Sites {
            u,
            counts,
            means,
            ss_within,
            n_obs: y.len(),
        },
    ))
}
