use serde::{Deserialize, Serialize};

/// Number of experiment coordinates, including the decoy `Nx`.
pub const NUM_INPUTS: usize = 7;

/// Coordinate names in canonical order. This order is used everywhere a
/// point is flattened: CSV columns, design matrices, search bounds.
pub const INPUT_NAMES: [&str; NUM_INPUTS] = ["N", "P", "K", "Na", "Ca", "Mg", "Nx"];

/// One experimental setting of the seven nutrient levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputPoint {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Na")]
    pub na: f64,
    #[serde(rename = "Ca")]
    pub ca: f64,
    #[serde(rename = "Mg")]
    pub mg: f64,
    #[serde(rename = "Nx")]
    pub nx: f64,
}

impl InputPoint {
    pub const fn from_array(v: [f64; NUM_INPUTS]) -> Self {
        Self {
            n: v[0],
            p: v[1],
            k: v[2],
            na: v[3],
            ca: v[4],
            mg: v[5],
            nx: v[6],
        }
    }

    /// Panics unless `v.len() == NUM_INPUTS`.
    pub fn from_slice(v: &[f64]) -> Self {
        let arr: [f64; NUM_INPUTS] = v.try_into().expect("input point needs seven coordinates");
        Self::from_array(arr)
    }

    pub const fn splat(v: f64) -> Self {
        Self::from_array([v; NUM_INPUTS])
    }

    pub const fn to_array(&self) -> [f64; NUM_INPUTS] {
        [self.n, self.p, self.k, self.na, self.ca, self.mg, self.nx]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.to_array()[index]
    }

    pub fn with(&self, index: usize, value: f64) -> Self {
        let mut v = self.to_array();
        v[index] = value;
        Self::from_array(v)
    }

    /// Index of the first coordinate that is negative or not finite.
    pub fn first_invalid(&self) -> Option<usize> {
        self.to_array()
            .iter()
            .position(|x| !x.is_finite() || *x < 0.0)
    }
}

impl From<[f64; NUM_INPUTS]> for InputPoint {
    fn from(v: [f64; NUM_INPUTS]) -> Self {
        Self::from_array(v)
    }
}
