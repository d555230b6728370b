use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ols::LinearFit;
use crate::terms::Term;
use crate::RsmError;

const GRID_PER_SIDE: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryKind {
    Maximum,
    Minimum,
    Saddle,
    /// Some eigenvalue is numerically zero.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RidgePoint {
    pub mu: f64,
    /// `None` when `B - mu I` is singular.
    pub x: Option<Vec<f64>>,
    pub radius: f64,
    pub predicted: f64,
    pub singular: bool,
}

/// `y = b0 + b'x + x'Bx` in the fitted variables.
#[derive(Clone, Debug)]
pub struct QuadraticCanonical {
    /// Input indices, in the order used by `b`, `b_matrix` and all points.
    pub variables: Vec<usize>,
    pub intercept: f64,
    pub b: DVector<f64>,
    pub b_matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns match `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub stationary_point: Option<Vec<f64>>,
    pub kind: StationaryKind,
    pub ridge: Vec<RidgePoint>,
}

impl QuadraticCanonical {
    pub fn value(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        self.intercept + self.b.dot(&x) + x.dot(&(&self.b_matrix * &x))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (&self.b + 2.0 * &self.b_matrix * x).iter().copied().collect()
    }

    pub fn stationary_value(&self) -> Option<f64> {
        self.stationary_point.as_deref().map(|x| self.value(x))
    }

    /// `x(mu) = -1/2 (B - mu I)^-1 b`.
    pub fn ridge_point(&self, mu: f64) -> RidgePoint {
        ridge_point(self, mu)
    }

    /// Maximum of the fitted surface on the sphere of the given radius
    /// around the origin, found by bisection on `mu` above the largest
    /// eigenvalue.
    pub fn max_on_sphere(&self, radius: f64) -> Option<Vec<f64>> {
        self.on_sphere(radius, true)
    }

    pub fn min_on_sphere(&self, radius: f64) -> Option<Vec<f64>> {
        self.on_sphere(radius, false)
    }

    fn on_sphere(&self, radius: f64, maximize: bool) -> Option<Vec<f64>> {
        if radius <= 0.0 || self.b.norm() == 0.0 {
            return None;
        }
        let edge = if maximize {
            *self.eigenvalues.last()?
        } else {
            self.eigenvalues[0]
        };
        let sign = if maximize { 1.0 } else { -1.0 };
        // Radius falls from infinity at the edge eigenvalue to zero far away.
        let mut near = edge;
        let mut far = edge + sign * (self.b.norm() / radius + 1.0);
        while ridge_point(self, far).radius > radius {
            far = edge + 2.0 * (far - edge);
        }
        for _ in 0..200 {
            let mid = 0.5 * (near + far);
            if ridge_point(self, mid).radius > radius {
                near = mid;
            } else {
                far = mid;
            }
        }
        ridge_point(self, 0.5 * (near + far)).x
    }
}

fn ridge_point(c: &QuadraticCanonical, mu: f64) -> RidgePoint {
    let m = c.b.len();
    let shifted = &c.b_matrix - DMatrix::identity(m, m) * mu;
    let scale = c.eigenvalues.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    let near_eigen = c.eigenvalues.iter().any(|l| (l - mu).abs() <= 1e-12 * scale);
    let solved = if near_eigen { None } else { shifted.lu().solve(&(-0.5 * &c.b)) };
    match solved {
        Some(x) => {
            let x: Vec<f64> = x.iter().copied().collect();
            RidgePoint {
                mu,
                radius: x.iter().map(|v| v * v).sum::<f64>().sqrt(),
                predicted: c.value(&x),
                x: Some(x),
                singular: false,
            }
        }
        None => RidgePoint {
            mu,
            x: None,
            radius: f64::INFINITY,
            predicted: f64::NAN,
            singular: true,
        },
    }
}

/// `mu` grid: each eigenvalue itself, 50 log-spaced values beyond each end
/// of the spectrum and 50 evenly spaced values inside each gap.
fn mu_grid(eigenvalues: &[f64]) -> Vec<f64> {
    let lo = eigenvalues[0];
    let hi = *eigenvalues.last().unwrap();
    let spread = (hi - lo).max(hi.abs()).max(lo.abs()).max(1e-12);
    let n = GRID_PER_SIDE;
    let offsets: Vec<f64> = (0..n)
        .map(|k| spread * 10f64.powf(-3.0 + 5.0 * k as f64 / (n - 1) as f64))
        .collect();
    let mut grid: Vec<f64> = offsets.iter().rev().map(|o| lo - o).collect();
    for (i, w) in eigenvalues.windows(2).enumerate() {
        if i == 0 {
            grid.push(w[0]);
        }
        if w[1] > w[0] {
            grid.extend((1..=n).map(|k| w[0] + (w[1] - w[0]) * k as f64 / (n + 1) as f64));
        }
        grid.push(w[1]);
    }
    if eigenvalues.len() == 1 {
        grid.push(lo);
    }
    grid.extend(offsets.iter().map(|o| hi + o));
    grid
}

/// Canonical analysis of a second-order fit: stationary point, eigenvalues
/// and ridge trace.
pub fn ridge_analysis(fit: &LinearFit) -> Result<QuadraticCanonical, RsmError> {
    if !fit.has_quadratics() {
        return Err(RsmError::NotSecondOrder);
    }
    let mut variables: Vec<usize> = fit.terms.iter().flat_map(|t| t.variables()).collect();
    variables.sort_unstable();
    variables.dedup();
    let pos = |v: usize| variables.iter().position(|&u| u == v).unwrap();
    let m = variables.len();
    let mut b = DVector::<f64>::zeros(m);
    let mut bm = DMatrix::<f64>::zeros(m, m);
    let mut intercept = 0.0;
    for (t, c) in fit.terms.iter().zip(&fit.coefficients) {
        match *t {
            Term::Intercept => intercept += c,
            Term::Main(i) => b[pos(i)] += c,
            Term::Quadratic(i) => bm[(pos(i), pos(i))] += c,
            Term::Interaction(i, j) => {
                bm[(pos(i), pos(j))] += 0.5 * c;
                bm[(pos(j), pos(i))] += 0.5 * c;
            }
        }
    }
    let eig = SymmetricEigen::new(bm.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);

    let scale = eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let degenerate = scale == 0.0 || eigenvalues.iter().any(|l| l.abs() <= 1e-10 * scale);
    let kind = if degenerate {
        StationaryKind::Degenerate
    } else if eigenvalues.iter().all(|&l| l < 0.0) {
        StationaryKind::Maximum
    } else if eigenvalues.iter().all(|&l| l > 0.0) {
        StationaryKind::Minimum
    } else {
        StationaryKind::Saddle
    };
    let stationary_point = if degenerate {
        None
    } else {
        bm.clone()
            .lu()
            .solve(&(-0.5 * &b))
            .map(|x| x.iter().copied().collect())
    };

    let mut out = QuadraticCanonical {
        variables,
        intercept,
        b,
        b_matrix: bm,
        eigenvalues,
        eigenvectors,
        stationary_point,
        kind,
        ridge: Vec::new(),
    };
    out.ridge = mu_grid(&out.eigenvalues).into_iter().map(|mu| ridge_point(&out, mu)).collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::ols::fit_ols;
    use crate::terms::second_order;
    use std::sync::Arc;

    fn fit_exact(dim: usize, f: impl Fn(&[f64]) -> f64) -> LinearFit {
        let mut inputs = Vec::new();
        let levels = [-2.0, -1.0, 0.0, 1.0, 2.5];
        let total = levels.len().pow(dim as u32);
        for mut k in 0..total {
            let mut x = Vec::new();
            for _ in 0..dim {
                x.push(levels[k % levels.len()]);
                k /= levels.len();
            }
            inputs.push(x);
        }
        let y = inputs.iter().map(|x| f(x)).collect();
        let vars: Vec<usize> = (0..dim).collect();
        fit_ols(&Arc::new(Dataset::unnamed(inputs, y)), &second_order(&vars)).unwrap()
    }

    #[test]
    fn one_dimensional_square() {
        let c = ridge_analysis(&fit_exact(1, |x| -(x[0] - 2.0).powi(2))).unwrap();
        assert!((c.b_matrix[(0, 0)] + 1.0).abs() < 1e-10);
        assert!((c.b[0] - 4.0).abs() < 1e-10);
        assert!((c.stationary_point.as_ref().unwrap()[0] - 2.0).abs() < 1e-10);
        assert!((c.eigenvalues[0] + 1.0).abs() < 1e-10);
        assert_eq!(c.kind, StationaryKind::Maximum);
    }

    #[test]
    fn two_dimensional_hand_solve() {
        // Gradient: -2x1 + x2 + 3 = 0, x1 - 4x2 + 1 = 0  =>  (13/7, 5/7).
        let c = ridge_analysis(&fit_exact(2, |x| -x[0] * x[0] - 2.0 * x[1] * x[1] + x[0] * x[1] + 3.0 * x[0] + x[1])).unwrap();
        let xs = c.stationary_point.clone().unwrap();
        assert!((xs[0] - 13.0 / 7.0).abs() < 1e-10);
        assert!((xs[1] - 5.0 / 7.0).abs() < 1e-10);
        assert_eq!(c.kind, StationaryKind::Maximum);
        assert!(c.gradient(&xs).iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn homogeneous_quadratic_stationary_at_origin() {
        let c = ridge_analysis(&fit_exact(2, |x| -x[0] * x[0] - 2.0 * x[1] * x[1] + x[0] * x[1])).unwrap();
        let xs = c.stationary_point.clone().unwrap();
        assert!(xs.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn saddle() {
        let c = ridge_analysis(&fit_exact(2, |x| x[0] * x[0] - x[1] * x[1])).unwrap();
        assert!((c.eigenvalues[0] + 1.0).abs() < 1e-10 && (c.eigenvalues[1] - 1.0).abs() < 1e-10);
        assert_eq!(c.kind, StationaryKind::Saddle);
        // Hessian eigenvalues are twice those of B.
        assert!((2.0 * c.eigenvalues[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn eigendecomposition_reconstructs_b() {
        let c = ridge_analysis(&fit_exact(3, |x| -x[0] * x[0] + 0.4 * x[0] * x[2] - 0.5 * x[1] * x[1] + x[1] * x[2] - 3.0 * x[2] * x[2] + x[0])).unwrap();
        let lam = DMatrix::from_diagonal(&DVector::from_vec(c.eigenvalues.clone()));
        let rebuilt = &c.eigenvectors * lam * c.eigenvectors.transpose();
        assert!((rebuilt - &c.b_matrix).abs().max() < 1e-10);
        let xs = c.stationary_point.clone().unwrap();
        let lhs = 2.0 * &c.b_matrix * DVector::from_vec(xs.clone());
        assert!((lhs + &c.b).abs().max() < 1e-10);
        assert!(c.gradient(&xs).iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn ridge_trace_brackets_and_flags_eigenvalues() {
        let c = ridge_analysis(&fit_exact(2, |x| -x[0] * x[0] - 2.0 * x[1] * x[1] + x[0] * x[1] + 3.0 * x[0] + x[1])).unwrap();
        assert_eq!(c.ridge.len(), 3 * GRID_PER_SIDE + 2);
        assert_eq!(c.ridge.iter().filter(|p| p.singular).count(), 2);
        assert!(c.ridge.windows(2).all(|w| w[0].mu < w[1].mu));
        // Above the top eigenvalue the trace is a sequence of constrained maxima.
        let above: Vec<_> = c.ridge.iter().filter(|p| p.mu > c.eigenvalues[1]).collect();
        assert!(above.windows(2).all(|w| w[1].radius < w[0].radius));
    }

    #[test]
    fn sphere_maximum_beats_neighbours() {
        let c = ridge_analysis(&fit_exact(2, |x| x[0] * x[0] - x[1] * x[1] + 0.5 * x[0] + x[1])).unwrap();
        let x = c.max_on_sphere(1.5).unwrap();
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!((r - 1.5).abs() < 1e-8);
        let best = c.value(&x);
        for k in 0..360 {
            let a = k as f64 * std::f64::consts::PI / 180.0;
            assert!(c.value(&[1.5 * a.cos(), 1.5 * a.sin()]) <= best + 1e-9);
        }
    }

    #[test]
    fn first_order_fit_is_rejected() {
        let inputs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let data = Arc::new(Dataset::unnamed(inputs, vec![1.0, 2.0, 3.0, 4.0, 6.0]));
        let fit = fit_ols(&data, &crate::terms::first_order(&[0])).unwrap();
        assert!(matches!(ridge_analysis(&fit), Err(RsmError::NotSecondOrder)));
    }
}
