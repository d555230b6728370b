use yieldgame_core::store::ExportRow;
use yieldgame_core::INPUT_NAMES;

/// Observations in long form: one row per replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, inputs: Vec<Vec<f64>>, y: Vec<f64>) -> Self {
        assert_eq!(inputs.len(), y.len(), "one response per input row");
        Self { names, inputs, y }
    }

    /// Unnamed columns `x1..xd`.
    pub fn unnamed(inputs: Vec<Vec<f64>>, y: Vec<f64>) -> Self {
        let d = inputs.first().map_or(0, Vec::len);
        Self::new((1..=d).map(|i| format!("x{i}")).collect(), inputs, y)
    }

    /// Expands every replicate of every exported run into its own row.
    pub fn from_export(rows: &[ExportRow]) -> Self {
        let mut inputs = Vec::new();
        let mut y = Vec::new();
        for row in rows {
            for v in &row.yields {
                inputs.push(row.point.to_array().to_vec());
                y.push(*v);
            }
        }
        Self::new(INPUT_NAMES.iter().map(|s| s.to_string()).collect(), inputs, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn coded(&self, coding: &Coding) -> Self {
        Self {
            names: self.names.clone(),
            inputs: self.inputs.iter().map(|x| coding.encode(x)).collect(),
            y: self.y.clone(),
        }
    }
}

/// Affine coding `u = (x - center) / half_range`, the usual RSM convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Coding {
    pub center: Vec<f64>,
    pub half_range: Vec<f64>,
}

impl Coding {
    /// Centers on the midrange of `inputs`; a constant column gets unit
    /// half-range.
    pub fn from_inputs(inputs: &[Vec<f64>]) -> Self {
        let d = inputs.first().map_or(0, Vec::len);
        let mut center = Vec::with_capacity(d);
        let mut half_range = Vec::with_capacity(d);
        for j in 0..d {
            let (lo, hi) = inputs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
            center.push(0.5 * (lo + hi));
            let h = 0.5 * (hi - lo);
            half_range.push(if h > 0.0 { h } else { 1.0 });
        }
        Self { center, half_range }
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&self.half_range)
            .map(|((x, c), h)| (x - c) / h)
            .collect()
    }

    pub fn decode(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.center)
            .zip(&self.half_range)
            .map(|((u, c), h)| c + u * h)
            .collect()
    }
}
