//! Latin hypercube designs.
//!
//! Points are generated in the unit cube and mapped affinely onto the
//! requested bounds. Column `j` of an `n`-point design holds exactly one
//! value in each stratum `[lo + i*h, lo + (i+1)*h)`, `h = (hi - lo)/n`.

use rand::seq::SliceRandom;
use rand::Rng;

/// Plain jittered LHS with `n` rows over `bounds.len()` columns.
pub fn latin_hypercube<R: Rng + ?Sized>(
    n: usize,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    scale(&unit_lhs(n, bounds.len(), rng), bounds)
}

/// Best-of-`candidates` LHS under the maximin criterion, followed by
/// greedy within-column swaps that only ever increase the minimum pairwise
/// distance.
///
/// The first candidate consumes the RNG exactly like [`latin_hypercube`],
/// so on a matched seed the result is never worse than the plain design.
pub fn maximin_latin_hypercube<R: Rng + ?Sized>(
    n: usize,
    bounds: &[(f64, f64)],
    candidates: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let d = bounds.len();
    let mut best = unit_lhs(n, d, rng);
    let mut best_score = min_pairwise_distance(&best);
    for _ in 1..candidates.max(1) {
        let cand = unit_lhs(n, d, rng);
        let score = min_pairwise_distance(&cand);
        if score > best_score {
            best = cand;
            best_score = score;
        }
    }
    if n >= 3 {
        let sweeps = 4 * n * d;
        for _ in 0..sweeps {
            let col = rng.random_range(0..d);
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            swap_col(&mut best, col, a, b);
            let score = min_pairwise_distance(&best);
            if score > best_score {
                best_score = score;
            } else {
                swap_col(&mut best, col, a, b);
            }
        }
    }
    scale(&best, bounds)
}

/// Smallest Euclidean distance between any two rows (`inf` for < 2 rows).
pub fn min_pairwise_distance(rows: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..rows.len() {
        for j in 0..i {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}

/// Maps bounded rows back into the unit cube.
pub fn to_unit(rows: &[Vec<f64>], bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(bounds)
                .map(|(x, (lo, hi))| (x - lo) / (hi - lo))
                .collect()
        })
        .collect()
}

fn unit_lhs<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; d]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for (i, row) in rows.iter_mut().enumerate() {
            let u: f64 = rng.random();
            row[j] = (perm[i] as f64 + u) / n as f64;
        }
    }
    rows
}

fn swap_col(rows: &mut [Vec<f64>], col: usize, a: usize, b: usize) {
    let tmp = rows[a][col];
    rows[a][col] = rows[b][col];
    rows[b][col] = tmp;
}

fn scale(unit: &[Vec<f64>], bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    unit.iter()
        .map(|r| {
            r.iter()
                .zip(bounds)
                .map(|(u, (lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect()
}
