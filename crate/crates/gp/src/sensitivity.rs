use rand::Rng;
use serde::Serialize;
use yieldgame_core::design::latin_hypercube;

#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityConfig {
    /// Rows in each of the two pick-freeze matrices.
    pub samples: usize,
    pub grid_points: usize,
    /// Rows of the first matrix averaged over for partial dependence.
    pub pd_rows: usize,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        Self {
            samples: 4096,
            grid_points: 50,
            pd_rows: 512,
        }
    }
}

/// First-order and total Sobol indices with Monte Carlo standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolIndices {
    pub main: Vec<f64>,
    pub main_se: Vec<f64>,
    pub total: Vec<f64>,
    pub total_se: Vec<f64>,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialDependence {
    pub input: usize,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl PartialDependence {
    pub fn range(&self) -> f64 {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Linear interpolation on the grid.
    pub fn at(&self, v: f64) -> f64 {
        let g = &self.grid;
        let i = g.partition_point(|x| *x < v).clamp(1, g.len() - 1);
        let t = (v - g[i - 1]) / (g[i] - g[i - 1]);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    /// `None` when the surface is numerically constant over the box.
    pub indices: Option<SobolIndices>,
    pub partial_dependence: Vec<PartialDependence>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var.sqrt())
}

/// Pick-freeze Sobol indices of `f` under independent uniforms on `bounds`,
/// from two independent Latin hypercubes `A` and `B`. Main effects use
/// `f(B)(f(AB_i) - f(A))`, totals `(f(A) - f(AB_i))^2 / 2`.
pub fn sobol_indices<F, R>(f: &F, bounds: &[(f64, f64)], samples: usize, rng: &mut R) -> Option<SobolIndices>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let d = bounds.len();
    let a = latin_hypercube(samples, bounds, rng);
    let b = latin_hypercube(samples, bounds, rng);
    let fa: Vec<f64> = a.iter().map(|x| f(x)).collect();
    let fb: Vec<f64> = b.iter().map(|x| f(x)).collect();
    let all: Vec<f64> = fa.iter().chain(&fb).copied().collect();
    let (mean, sd) = mean_sd(&all);
    let variance = sd * sd;
    if !(variance > 1e-14 * mean.abs().max(1.0).powi(2)) {
        return None;
    }
    let root_n = (samples as f64).sqrt();
    let mut out = SobolIndices {
        main: Vec::with_capacity(d),
        main_se: Vec::with_capacity(d),
        total: Vec::with_capacity(d),
        total_se: Vec::with_capacity(d),
        variance,
    };
    let mut mixed = vec![0.0; d];
    for i in 0..d {
        let mut first = Vec::with_capacity(samples);
        let mut tot = Vec::with_capacity(samples);
        for r in 0..samples {
            mixed.copy_from_slice(&a[r]);
            mixed[i] = b[r][i];
            let fab = f(&mixed);
            first.push(fb[r] * (fab - fa[r]));
            tot.push(0.5 * (fa[r] - fab).powi(2));
        }
        let (m1, s1) = mean_sd(&first);
        let (mt, st) = mean_sd(&tot);
        out.main.push(m1 / variance);
        out.main_se.push(s1 / root_n / variance);
        out.total.push(mt / variance);
        out.total_se.push(st / root_n / variance);
    }
    Some(out)
}

/// Average of `f` over `base` rows with input `j` set to each grid value.
pub fn partial_dependence<F>(f: &F, bounds: &[(f64, f64)], j: usize, grid_points: usize, base: &[Vec<f64>]) -> PartialDependence
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let (lo, hi) = bounds[j];
    let steps = grid_points.max(2) - 1;
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let mut row = vec![0.0; bounds.len()];
    let values = grid
        .iter()
        .map(|&v| {
            base.iter()
                .map(|b| {
                    row.copy_from_slice(b);
                    row[j] = v;
                    f(&row)
                })
                .sum::<f64>()
                / base.len() as f64
        })
        .collect();
    PartialDependence { input: j, grid, values }
}

/// Sobol indices and partial dependence curves for every input.
pub fn sensitivity<F, R>(f: &F, bounds: &[(f64, f64)], config: &SensitivityConfig, rng: &mut R) -> Sensitivity
where
    F: Fn(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let indices = sobol_indices(f, bounds, config.samples, rng);
    let base = latin_hypercube(config.pd_rows.max(1), bounds, rng);
    let partial_dependence = (0..bounds.len())
        .map(|j| partial_dependence(f, bounds, j, config.grid_points, &base))
        .collect();
    Sensitivity {
        indices,
        partial_dependence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn additive_linear_function() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = |x: &[f64]| x[0] + x[1];
        let s = sobol_indices(&f, &[(0.0, 1.0), (0.0, 1.0)], 4096, &mut rng).unwrap();
        for i in 0..2 {
            assert!((s.main[i] - 0.5).abs() < 0.02, "{s:?}");
            assert!((s.total[i] - 0.5).abs() < 0.02, "{s:?}");
        }
    }

    #[test]
    fn interaction_splits_main_and_total() {
        // x0 * x1 on [-1,1]^2 has no main effects and total effects of 1.
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let f = |x: &[f64]| x[0] * x[1];
        let s = sobol_indices(&f, &[(-1.0, 1.0); 2], 4096, &mut rng).unwrap();
        let sum: f64 = s.main.iter().sum();
        let se: f64 = s.main_se.iter().sum();
        assert!(sum <= 1.0 + 3.0 * se);
        for i in 0..2 {
            assert!(s.main[i].abs() < 3.0 * s.main_se[i] + 0.02);
            assert!((s.total[i] - 1.0).abs() < 0.05);
            assert!(s.total[i] >= s.main[i] - 3.0 * (s.main_se[i] + s.total_se[i]));
        }
    }

    #[test]
    fn constant_surface_is_undefined() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = sensitivity(&|_: &[f64]| 4.0, &[(0.0, 1.0)], &SensitivityConfig::default(), &mut rng);
        assert!(s.indices.is_none());
        assert_eq!(s.partial_dependence[0].range(), 0.0);
    }

    #[test]
    fn partial_dependence_of_additive_function_is_the_component() {
        let base = vec![vec![0.0, 0.2], vec![0.0, 0.8]];
        let pd = partial_dependence(&|x: &[f64]| 3.0 * x[0] + x[1], &[(0.0, 2.0), (0.0, 1.0)], 0, 5, &base);
        assert_eq!(pd.grid, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        for (g, v) in pd.grid.iter().zip(&pd.values) {
            assert!((v - (3.0 * g + 0.5)).abs() < 1e-12);
        }
        assert!((pd.at(1.25) - 4.25).abs() < 1e-12);
    }
}
