use argmin::core::{CostFunction, Error, Executor, State};
use argmin::solver::neldermead::NelderMead;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Clamped<'a, F> {
    f: &'a F,
    lo: &'a [f64],
    hi: &'a [f64],
}

fn clamp(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter().zip(lo).zip(hi).map(|((v, l), h)| v.clamp(*l, *h)).collect()
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Clamped<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> Result<f64, Error> {
        let v = (self.f)(&clamp(p, self.lo, self.hi));
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    }
}

/// Nelder-Mead from `x0` with the objective evaluated at the projection onto
/// the box. The initial simplex steps `step_frac` of each side, pointing
/// inward. The returned point is inside the box and never worse than `x0`.
pub fn minimize_bounded<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    step_frac: f64,
    max_iters: u64,
) -> Minimum {
    let x0 = clamp(x0, lo, hi);
    let mut simplex = vec![x0.clone()];
    for i in 0..x0.len() {
        let mut v = x0.clone();
        let step = step_frac * (hi[i] - lo[i]);
        v[i] += if v[i] + step <= hi[i] { step } else { -step };
        simplex.push(v);
    }
    let problem = Clamped { f, lo, hi };
    let start = problem.cost(&x0).unwrap_or(f64::INFINITY);
    let fallback = Minimum { x: x0.clone(), value: start };
    let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-10) else {
        return fallback;
    };
    let result = Executor::new(problem, solver).configure(|s| s.max_iters(max_iters)).run();
    match result {
        Ok(res) => {
            let state = res.state();
            match state.get_best_param() {
                Some(p) if state.get_best_cost() <= start => Minimum {
                    x: clamp(p, lo, hi),
                    value: state.get_best_cost(),
                },
                _ => fallback,
            }
        }
        Err(_) => fallback,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_and_boundary_minima() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 10.0 * (x[1] + 0.2).powi(2);
        let m = minimize_bounded(&f, &[0.9, 0.9], &[0.0, -1.0], &[1.0, 1.0], 0.1, 500);
        assert!((m.x[0] - 0.3).abs() < 1e-4 && (m.x[1] + 0.2).abs() < 1e-4);
        let m = minimize_bounded(&f, &[0.9, 0.9], &[0.5, 0.0], &[1.0, 1.0], 0.1, 500);
        assert!((m.x[0] - 0.5).abs() < 1e-4 && m.x[1].abs() < 1e-4);
    }
}
