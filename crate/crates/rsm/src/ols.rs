use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::terms::Term;
use crate::RsmError;

/// Column whose residual after projecting on earlier columns is below this
/// fraction of its own norm is treated as aliased.
const ALIAS_TOL: f64 = 1e-9;

/// Least-squares fit of a polynomial model.
#[derive(Clone, Debug)]
pub struct LinearFit {
    pub terms: Vec<Term>,
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub n: usize,
    /// `rss / (n - k)`
    pub residual_variance: f64,
    /// `n * ln(rss / n) + k * ln(n)`
    pub bic: f64,
    data: Arc<Dataset>,
}

impl LinearFit {
    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }

    pub fn k(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, term: Term) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| *t == term)
            .map(|i| self.coefficients[i])
    }

    pub fn intercept(&self) -> f64 {
        self.coefficient(Term::Intercept).unwrap_or(0.0)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .map(|(t, b)| t.eval(x) * b)
            .sum()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.data
            .inputs
            .iter()
            .zip(&self.data.y)
            .map(|(x, y)| y - self.predict(x))
            .collect()
    }

    pub fn term_labels(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.label(&self.data.names)).collect()
    }

    pub fn has_quadratics(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Quadratic(_)))
    }
}

pub fn bic(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).ln() + k as f64 * n.ln()
}

fn model_matrix(data: &Dataset, terms: &[Term]) -> DMatrix<f64> {
    DMatrix::from_fn(data.len(), terms.len(), |i, j| terms[j].eval(&data.inputs[i]))
}

/// Least-squares solve through a thin QR factorization.
fn qr_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let k = x.ncols();
    let qr = x.clone().qr();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let r = qr.r();
    r.solve_upper_triangular(&qty.rows(0, k).into_owned())
        .expect("full-rank R is invertible")
}

/// Terms whose column lies in the span of the columns before it, checked
/// in the given order.
pub fn aliased_terms(data: &Dataset, terms: &[Term]) -> Vec<Term> {
    let x = model_matrix(data, terms);
    let mut kept: Vec<usize> = Vec::new();
    let mut aliased = Vec::new();
    for j in 0..terms.len() {
        let col = x.column(j).into_owned();
        let norm = col.norm();
        if norm == 0.0 {
            aliased.push(terms[j]);
            continue;
        }
        let resid = if kept.is_empty() {
            norm
        } else {
            let sub = x.select_columns(kept.iter());
            let beta = qr_solve(&sub, &col);
            (&col - &sub * beta).norm()
        };
        if resid <= ALIAS_TOL * norm {
            aliased.push(terms[j]);
        } else {
            kept.push(j);
        }
    }
    aliased
}

pub fn fit_ols(data: &Arc<Dataset>, terms: &[Term]) -> Result<LinearFit, RsmError> {
    let n = data.len();
    let k = terms.len();
    if n <= k {
        return Err(RsmError::TooFewObservations { n, k });
    }
    let aliased = aliased_terms(data, terms);
    if !aliased.is_empty() {
        return Err(RsmError::RankDeficient(
            aliased.iter().map(|t| t.label(&data.names)).collect(),
        ));
    }
    let x = model_matrix(data, terms);
    let y = DVector::from_column_slice(&data.y);
    let beta = qr_solve(&x, &y);
    let rss = (&y - &x * &beta).norm_squared();
    Ok(LinearFit {
        terms: terms.to_vec(),
        coefficients: beta.iter().copied().collect(),
        rss,
        n,
        residual_variance: rss / (n - k) as f64,
        bic: bic(rss, n, k),
        data: Arc::clone(data),
    })
}

/// Drops aliased terms (in order) and fits the rest, returning the fit and
/// what was dropped.
pub fn fit_ols_dropping_aliased(data: &Arc<Dataset>, terms: &[Term]) -> Result<(LinearFit, Vec<Term>), RsmError> {
    let aliased = aliased_terms(data, terms);
    let kept: Vec<Term> = terms.iter().copied().filter(|t| !aliased.contains(t)).collect();
    Ok((fit_ols(data, &kept)?, aliased))
}
