//! The blackbox: a six-nutrient yield surface (plus a decoy seventh input)
//! observed through additive Gaussian noise whose variance drifts with the
//! game week.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::point::{InputPoint, INPUT_NAMES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("coordinate {name} = {value} is outside the domain (must be finite and >= 0)")]
    Domain { name: &'static str, value: f64 },
    #[error("replicate count {0} outside 1..=10")]
    Replicates(u32),
}

/// Constants of the yield surface
///
/// ```text
/// l1 = c0 + cn*N + cp*P + 1/((N+n_shift)(P+p_shift)) + ck*K + k_num/(K+k_shift)
/// l2 = ca_lo*((k_base + K + na_w*Na)/(Ca+1)) + ca_hi*((Ca+1)/(k_base + K + na_w*Na))
/// l3 = mg_num/(Mg+1)
/// yield = 1/(l1 + l2 + l3)
/// ```
///
/// `Default` gives the printed reference constants. `Nx` never enters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct YieldCoefficients {
    pub c0: f64,
    pub cn: f64,
    pub cp: f64,
    pub n_shift: f64,
    pub p_shift: f64,
    pub ck: f64,
    pub k_num: f64,
    pub k_shift: f64,
    pub ca_lo: f64,
    pub ca_hi: f64,
    pub k_base: f64,
    pub na_w: f64,
    pub mg_num: f64,
}

impl Default for YieldCoefficients {
    fn default() -> Self {
        Self {
            c0: 0.015,
            cn: 0.0005,
            cp: 0.001,
            n_shift: 5.0,
            p_shift: 2.0,
            ck: 0.001,
            k_num: 0.1,
            k_shift: 2.0,
            ca_lo: 0.001,
            ca_hi: 0.004,
            k_base: 2.0,
            na_w: 0.5,
            mg_num: 0.02,
        }
    }
}

impl YieldCoefficients {
    pub fn evaluate(&self, x: &InputPoint) -> Result<f64, SimError> {
        if let Some(i) = x.first_invalid() {
            return Err(SimError::Domain {
                name: INPUT_NAMES[i],
                value: x.get(i),
            });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Same as [`evaluate`](Self::evaluate) without the domain check.
    pub fn evaluate_unchecked(&self, x: &InputPoint) -> f64 {
        let l1 = self.c0
            + self.cn * x.n
            + self.cp * x.p
            + 1.0 / ((x.n + self.n_shift) * (x.p + self.p_shift))
            + self.ck * x.k
            + self.k_num / (x.k + self.k_shift);
        let balance = self.k_base + x.k + self.na_w * x.na;
        let l2 = self.ca_lo * (balance / (x.ca + 1.0)) + self.ca_hi * ((x.ca + 1.0) / balance);
        let l3 = self.mg_num / (x.mg + 1.0);
        1.0 / (l1 + l2 + l3)
    }
}

/// Noise-free yield under the reference constants.
pub fn yield_true(x: &InputPoint) -> Result<f64, SimError> {
    YieldCoefficients::default().evaluate(x)
}

/// `variance(w) = base + amplitude * (cos(2*pi*(w - start_week)/period) + 1)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSchedule {
    pub base_variance: f64,
    pub amplitude: f64,
    pub period_weeks: f64,
    pub start_week: i64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        Self {
            base_variance: 0.1,
            amplitude: 0.05,
            period_weeks: 10.0,
            start_week: 1,
        }
    }
}

impl NoiseSchedule {
    pub fn variance(&self, week: u32) -> f64 {
        let phase = 2.0 * std::f64::consts::PI * (i64::from(week) - self.start_week) as f64
            / self.period_weeks;
        self.base_variance + self.amplitude * (phase.cos() + 1.0)
    }

    pub fn max_variance(&self) -> f64 {
        self.base_variance + 2.0 * self.amplitude
    }
}

/// One simulated run: `reps` noisy draws around the true yield at `point`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub week: u32,
    pub point: InputPoint,
    pub true_yield: f64,
    pub noisy_yields: Vec<f64>,
}

pub fn observe<R: Rng + ?Sized>(
    surface: &YieldCoefficients,
    schedule: &NoiseSchedule,
    point: &InputPoint,
    week: u32,
    reps: u32,
    rng: &mut R,
) -> Result<Observation, SimError> {
    if !(1..=10).contains(&reps) {
        return Err(SimError::Replicates(reps));
    }
    let true_yield = surface.evaluate(point)?;
    let sd = schedule.variance(week).sqrt();
    let noisy_yields = (0..reps)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            true_yield + sd * z
        })
        .collect();
    Ok(Observation {
        week,
        point: *point,
        true_yield,
        noisy_yields,
    })
}
