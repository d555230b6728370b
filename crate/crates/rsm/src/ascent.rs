use rand::Rng;

use crate::data::Coding;
use crate::ols::LinearFit;
use crate::terms::Term;
use crate::RsmError;

/// One point on a steepest-ascent path.
#[derive(Clone, Debug, PartialEq)]
pub struct AscentPoint {
    /// Step index, starting at 1.
    pub step: usize,
    /// Location in the fit's own coordinates.
    pub fit_coords: Vec<f64>,
    /// Location in natural units, after clipping.
    pub point: Vec<f64>,
    pub predicted: f64,
    /// Some natural coordinate was negative and was set to zero.
    pub clipped: bool,
}

fn gradient(fit: &LinearFit, x0: &[f64]) -> Result<Vec<f64>, RsmError> {
    let d = fit.data().dim();
    if x0.len() != d {
        return Err(RsmError::Dimension { expected: d, found: x0.len() });
    }
    let mut g = vec![0.0; d];
    for (t, b) in fit.terms.iter().zip(&fit.coefficients) {
        match *t {
            Term::Intercept => {}
            Term::Main(i) => g[i] += b,
            Term::Interaction(i, j) => {
                g[i] += b * x0[j];
                g[j] += b * x0[i];
            }
            Term::Quadratic(_) => return Err(RsmError::NotFirstOrder),
        }
    }
    Ok(g)
}

/// Unit gradient of the fitted surface at `x0`. Coordinates that no term
/// uses get zero. A gradient at round-off level relative to the largest
/// coefficient counts as zero.
pub fn ascent_direction(fit: &LinearFit, x0: &[f64]) -> Result<Vec<f64>, RsmError> {
    let g = gradient(fit, x0)?;
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = fit.coefficients.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if norm <= 1e-12 * scale || !norm.is_finite() {
        return Err(RsmError::NoDirection);
    }
    Ok(g.into_iter().map(|v| v / norm).collect())
}

fn active(fit: &LinearFit) -> Vec<bool> {
    let mut a = vec![false; fit.data().dim()];
    for t in &fit.terms {
        for v in t.variables() {
            a[v] = true;
        }
    }
    a
}

fn finish(fit: &LinearFit, step: usize, fit_coords: Vec<f64>, coding: Option<&Coding>) -> AscentPoint {
    let predicted = fit.predict(&fit_coords);
    let mut point = match coding {
        Some(c) => c.decode(&fit_coords),
        None => fit_coords.clone(),
    };
    let mut clipped = false;
    for v in point.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
            clipped = true;
        }
    }
    AscentPoint {
        step,
        fit_coords,
        point,
        predicted,
        clipped,
    }
}

/// `x(t) = x0 + t * step_size * u` for `t = 1..=steps`, where `u` is the
/// ascent direction at `x0`. Inputs not in the model stay at `x0`.
///
/// `x0` is in the fit's coordinates; pass the coding used for the fit to get
/// natural-unit points back.
pub fn steepest_ascent_path(
    fit: &LinearFit,
    x0: &[f64],
    steps: usize,
    step_size: f64,
    coding: Option<&Coding>,
) -> Result<Vec<AscentPoint>, RsmError> {
    let u = ascent_direction(fit, x0)?;
    Ok((1..=steps)
        .map(|t| {
            let x = x0
                .iter()
                .zip(&u)
                .map(|(x, u)| x + t as f64 * step_size * u)
                .collect();
            finish(fit, t, x, coding)
        })
        .collect())
}

/// Like [`steepest_ascent_path`], but inputs not in the model are spread over
/// `bounds` (natural units) by a Latin hypercube across the steps.
pub fn steepest_ascent_path_lhs_fill<R: Rng + ?Sized>(
    fit: &LinearFit,
    x0: &[f64],
    steps: usize,
    step_size: f64,
    coding: Option<&Coding>,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Result<Vec<AscentPoint>, RsmError> {
    let d = fit.data().dim();
    if bounds.len() != d {
        return Err(RsmError::Dimension { expected: d, found: bounds.len() });
    }
    let mut path = steepest_ascent_path(fit, x0, steps, step_size, coding)?;
    if path.is_empty() {
        return Ok(path);
    }
    let act = active(fit);
    let fill = yieldgame_core::design::latin_hypercube(steps, bounds, rng);
    for (p, row) in path.iter_mut().zip(fill) {
        let mut natural = match coding {
            Some(c) => c.decode(&p.fit_coords),
            None => p.fit_coords.clone(),
        };
        for j in (0..d).filter(|&j| !act[j]) {
            natural[j] = row[j];
        }
        let coords = match coding {
            Some(c) => c.encode(&natural),
            None => natural,
        };
        *p = finish(fit, p.step, coords, coding);
    }
    Ok(path)
}
