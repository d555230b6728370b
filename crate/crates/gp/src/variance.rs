use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use yieldgame_core::InputPoint;

pub const VARIANCE_PERIOD_WEEKS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeekVariance {
    pub week: u32,
    /// Pooled within-point sample variance.
    pub variance: f64,
    /// Pooled degrees of freedom.
    pub df: usize,
}

/// `v(w) = offset + b cos(2 pi w / 10) + c sin(2 pi w / 10)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub cos_coef: f64,
    pub sin_coef: f64,
    pub amplitude: f64,
    /// Week of the fitted peak, in `[0, 10)`.
    pub peak_week: f64,
    pub offset_se: f64,
    pub amplitude_se: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl SinusoidFit {
    pub fn at(&self, week: f64) -> f64 {
        let a = 2.0 * PI * week / VARIANCE_PERIOD_WEEKS;
        self.offset + self.cos_coef * a.cos() + self.sin_coef * a.sin()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceOverTime {
    pub weeks: Vec<WeekVariance>,
    /// `None` with fewer than three usable weeks.
    pub fit: Option<SinusoidFit>,
}

/// Per-week pooled replicate variance and a period-10 sinusoid fitted by
/// least squares weighted by degrees of freedom. Runs at the same point in
/// the same week are pooled.
pub fn variance_over_time<'a, I>(runs: I) -> VarianceOverTime
where
    I: IntoIterator<Item = (u32, InputPoint, &'a [f64])>,
{
    let mut cells: BTreeMap<(u32, [u64; 7]), Vec<f64>> = BTreeMap::new();
    for (week, point, yields) in runs {
        let key = point.to_array().map(f64::to_bits);
        cells.entry((week, key)).or_default().extend_from_slice(yields);
    }
    let mut by_week: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for ((week, _), ys) in &cells {
        if ys.len() < 2 {
            continue;
        }
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        let ss: f64 = ys.iter().map(|y| (y - m).powi(2)).sum();
        let e = by_week.entry(*week).or_default();
        e.0 += ss;
        e.1 += ys.len() - 1;
    }
    let weeks: Vec<WeekVariance> = by_week
        .into_iter()
        .map(|(week, (ss, df))| WeekVariance {
            week,
            variance: ss / df as f64,
            df,
        })
        .collect();
    let fit = fit_sinusoid(&weeks);
    VarianceOverTime { weeks, fit }
}

fn fit_sinusoid(weeks: &[WeekVariance]) -> Option<SinusoidFit> {
    if weeks.len() < 3 {
        return None;
    }
    let row = |w: u32| {
        let a = 2.0 * PI * w as f64 / VARIANCE_PERIOD_WEEKS;
        Vector3::new(1.0, a.cos(), a.sin())
    };
    let mut xtwx = Matrix3::zeros();
    let mut xtwy = Vector3::zeros();
    for w in weeks {
        let r = row(w.week);
        let wt = w.df as f64;
        xtwx += wt * r * r.transpose();
        xtwy += wt * r * w.variance;
    }
    let inv = xtwx.try_inverse()?;
    let beta = inv * xtwy;
    let fitted: Vec<f64> = weeks.iter().map(|w| row(w.week).dot(&beta)).collect();
    let residuals: Vec<f64> = weeks.iter().zip(&fitted).map(|(w, f)| w.variance - f).collect();
    let dof = weeks.len() as f64 - 3.0;
    let scale = if dof > 0.0 {
        weeks.iter().zip(&residuals).map(|(w, r)| w.df as f64 * r * r).sum::<f64>() / dof
    } else {
        f64::NAN
    };
    let cov = inv * scale;
    let (b, c) = (beta[1], beta[2]);
    let amplitude = b.hypot(c);
    let amplitude_se = if amplitude > 0.0 {
        let g = Vector3::new(0.0, b / amplitude, c / amplitude);
        (g.transpose() * cov * g)[0].max(0.0).sqrt()
    } else {
        cov[(1, 1)].max(cov[(2, 2)]).sqrt()
    };
    let peak_week = (c.atan2(b) * VARIANCE_PERIOD_WEEKS / (2.0 * PI)).rem_euclid(VARIANCE_PERIOD_WEEKS);
    Some(SinusoidFit {
        offset: beta[0],
        cos_coef: b,
        sin_coef: c,
        amplitude,
        peak_week,
        offset_se: cov[(0, 0)].max(0.0).sqrt(),
        amplitude_se,
        fitted,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    type Run = (u32, InputPoint, Vec<f64>);

    fn season(seed: u64, var: impl Fn(u32) -> f64) -> Vec<Run> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut runs = Vec::new();
        for week in 1..=13 {
            for p in 0..10 {
                let point = InputPoint::splat(1.0 + p as f64);
                let sd = var(week).sqrt();
                let ys = (0..10).map(|_| 5.0 + p as f64 + sd * rng.sample::<f64, _>(StandardNormal)).collect();
                runs.push((week, point, ys));
            }
        }
        runs
    }

    fn analyse(runs: &[Run]) -> VarianceOverTime {
        variance_over_time(runs.iter().map(|(w, p, y)| (*w, *p, y.as_slice())))
    }

    #[test]
    fn recovers_schedule_shape() {
        let truth = |w: u32| 0.1 + 0.05 * ((2.0 * PI * (w as f64 - 1.0) / 10.0).cos() + 1.0);
        let v = analyse(&season(5, truth));
        let fit = v.fit.unwrap();
        assert_eq!(v.weeks.len(), 13);
        assert!(v.weeks.iter().all(|w| w.df == 90));
        assert!((fit.offset - 0.15).abs() < 0.02);
        assert!((fit.amplitude - 0.05).abs() < 0.02);
        assert!((fit.peak_week - 1.0).abs() < 1.5 || (fit.peak_week - 11.0).abs() < 1.5);
        assert!((fit.at(3.0) - (fit.fitted[2])).abs() < 1e-12);
    }

    #[test]
    fn constant_variance_has_insignificant_amplitude() {
        let v = analyse(&season(6, |_| 0.15));
        let fit = v.fit.unwrap();
        assert!(fit.amplitude < 2.0 * fit.amplitude_se, "{} vs se {}", fit.amplitude, fit.amplitude_se);
    }

    #[test]
    fn weekly_estimate_ignores_a_level_shift() {
        let runs = season(7, |_| 0.2);
        let shifted: Vec<Run> = runs
            .iter()
            .map(|(w, p, y)| (*w, *p, y.iter().map(|v| v + if *w == 4 { 100.0 } else { 0.0 }).collect()))
            .collect();
        let a = analyse(&runs);
        let b = analyse(&shifted);
        assert!((a.weeks[3].variance - b.weeks[3].variance).abs() < 1e-9);
    }

    #[test]
    fn too_few_weeks_refuses_fit() {
        let runs: Vec<Run> = season(8, |_| 0.1).into_iter().filter(|r| r.0 <= 2).collect();
        let v = analyse(&runs);
        assert_eq!(v.weeks.len(), 2);
        assert!(v.fit.is_none());
    }

    #[test]
    fn single_replicate_runs_are_unusable_unless_repeated() {
        let p = InputPoint::splat(2.0);
        let a = [1.0];
        let b = [3.0];
        let v = variance_over_time([(1, p, &a[..]), (1, p, &b[..]), (2, InputPoint::splat(1.0), &a[..])]);
        assert_eq!(v.weeks, vec![WeekVariance { week: 1, variance: 2.0, df: 1 }]);
    }
}
