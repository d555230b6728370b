use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use yieldgame_core::design::latin_hypercube;
use yieldgame_core::store::ExportRow;
use yieldgame_core::{INPUT_NAMES, NUM_INPUTS};
use yieldgame_rsm::{
    ascent_direction, first_order, fit_ols, fit_ols_dropping_aliased, ridge_analysis, second_order,
    stepwise_bic_backward, Coding, Dataset, LinearFit, RsmError, StationaryKind, StepwiseOptions, Term,
};
use yieldgame_server::api::{PlayerRun, Status};

use super::{best_index, clamp_to, local_box, to_point, Obs, Planned, Strategy, StrategyError};
use crate::config::{ReplicatePolicy, StrategyConfig, StrategyKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalOptions {
    /// Design points in a first-order block, besides the center run.
    pub first_order_points: usize,
    /// Design points in a second-order block beyond the number of terms.
    pub second_order_extra: usize,
    /// At most this many inputs enter a second-order model.
    pub max_quadratic_vars: usize,
    /// Path step in coded units.
    pub step: f64,
    pub max_steps: usize,
    /// Consecutive drops that end a path.
    pub falls: u32,
    /// Multiplier on the box half-width after each cycle.
    pub shrink: f64,
    /// Smallest half-width, as a fraction of each bound's width.
    pub min_half_width: f64,
    /// Ridge radius in coded units when the stationary point is unusable.
    pub ridge_radius: f64,
    pub default_reps: u32,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self {
            first_order_points: 10,
            second_order_extra: 4,
            max_quadratic_vars: 3,
            step: 1.0,
            max_steps: 15,
            falls: 2,
            shrink: 0.75,
            min_half_width: 0.01,
            ridge_radius: 1.0,
            default_reps: 2,
        }
    }
}

#[derive(Clone, Debug)]
enum Phase {
    /// Waiting for the first download.
    Start,
    /// Running a queued design; analyzed once the queue is empty.
    Block {
        second_order: Option<Vec<usize>>,
        pending: VecDeque<Vec<f64>>,
        runs: Vec<Obs>,
    },
    Ascent {
        coding: Coding,
        direction: Vec<f64>,
        step: usize,
        best: f64,
        best_x: Vec<f64>,
        falls: u32,
        last: Vec<f64>,
    },
    /// The ridge candidate is out; recenter when it comes back.
    Confirm { block: Vec<Obs> },
}

/// First-order screen and stepwise selection, steepest ascent until the
/// response drops twice, recentering, and a second-order fit with ridge
/// analysis once the linear gradient vanishes.
pub struct ClassicalAgent {
    config: StrategyConfig,
    options: ClassicalOptions,
    center: Vec<f64>,
    half: Vec<f64>,
    /// Inputs kept by the last stepwise selection.
    active: Vec<usize>,
    phase: Phase,
    rng: ChaCha20Rng,
    /// Next run already planned but not yet observed.
    in_flight: Option<(Vec<f64>, String)>,
}

fn dataset(obs: &[Obs]) -> Arc<Dataset> {
    let mut inputs = Vec::new();
    let mut y = Vec::new();
    for o in obs {
        for v in &o.yields {
            inputs.push(o.x.clone());
            y.push(*v);
        }
    }
    Arc::new(Dataset::new(INPUT_NAMES.iter().map(|s| s.to_string()).collect(), inputs, y))
}

fn coding_of(region: &[(f64, f64)]) -> Coding {
    Coding {
        center: region.iter().map(|(a, b)| 0.5 * (a + b)).collect(),
        half_range: region.iter().map(|(a, b)| 0.5 * (b - a)).collect(),
    }
}

fn main_vars(fit: &LinearFit) -> Vec<usize> {
    fit.terms
        .iter()
        .filter_map(|t| match t {
            Term::Main(i) => Some(*i),
            _ => None,
        })
        .collect()
}

impl ClassicalAgent {
    pub fn new(config: StrategyConfig, options: ClassicalOptions) -> Self {
        let rng = ChaCha20Rng::seed_from_u64(config.seed);
        Self {
            config,
            options,
            center: Vec::new(),
            half: Vec::new(),
            active: Vec::new(),
            phase: Phase::Start,
            rng,
            in_flight: None,
        }
    }

    fn reps(&self) -> u32 {
        match self.config.replicates {
            ReplicatePolicy::Fixed(r) => r,
            ReplicatePolicy::Adaptive => self.options.default_reps,
        }
    }

    fn region(&self) -> Vec<(f64, f64)> {
        local_box(&self.center, &self.half, &self.config.bounds)
    }

    fn shrink(&mut self) {
        let f = self.options.shrink;
        let floor = self.options.min_half_width;
        for (h, (lo, hi)) in self.half.iter_mut().zip(&self.config.bounds) {
            *h = (*h * f).max(floor * (hi - lo));
        }
    }

    fn first_order_block(&mut self) -> Phase {
        let region = self.region();
        let mut pending: VecDeque<Vec<f64>> =
            latin_hypercube(self.options.first_order_points, &region, &mut self.rng).into();
        pending.push_back(coding_of(&region).center);
        Phase::Block {
            second_order: None,
            pending,
            runs: Vec::new(),
        }
    }

    fn second_order_block(&mut self, vars: Vec<usize>) -> Phase {
        let region = self.region();
        let k = second_order(&vars).len();
        let center = coding_of(&region).center;
        let sub: Vec<(f64, f64)> = vars.iter().map(|&j| region[j]).collect();
        let mut pending: VecDeque<Vec<f64>> = latin_hypercube(k + self.options.second_order_extra, &sub, &mut self.rng)
            .into_iter()
            .map(|row| {
                let mut x = center.clone();
                for (&j, v) in vars.iter().zip(row) {
                    x[j] = v;
                }
                x
            })
            .collect();
        pending.push_back(center);
        Phase::Block {
            second_order: Some(vars),
            pending,
            runs: Vec::new(),
        }
    }

    /// Inputs for a second-order block: the selected set, else the largest
    /// first-order effects.
    fn quadratic_vars(&self, full: Option<&LinearFit>) -> Vec<usize> {
        let cap = self.options.max_quadratic_vars;
        if !self.active.is_empty() {
            return self.active.iter().copied().take(cap).collect();
        }
        let mut ranked: Vec<(f64, usize)> = match full {
            Some(f) => f
                .terms
                .iter()
                .zip(&f.coefficients)
                .filter_map(|(t, c)| match t {
                    Term::Main(i) => Some((c.abs(), *i)),
                    _ => None,
                })
                .collect(),
            None => (0..NUM_INPUTS).map(|i| (0.0, i)).collect(),
        };
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut vars: Vec<usize> = ranked.into_iter().take(cap).map(|(_, i)| i).collect();
        vars.sort_unstable();
        vars
    }

    /// First-order analysis of a block: start a path, or move to a
    /// second-order block when there is no usable direction.
    fn analyze_first_order(&mut self, block: &[Obs], coding: Coding) -> Phase {
        let data = Arc::new(dataset(block).coded(&coding));
        let full = match fit_ols_dropping_aliased(&data, &first_order(&(0..NUM_INPUTS).collect::<Vec<_>>())) {
            Ok((fit, _)) => fit,
            Err(_) => return self.first_order_block(),
        };
        let reduced = stepwise_bic_backward(&full, StepwiseOptions::default()).unwrap_or_else(|_| full.clone());
        let selected = main_vars(&reduced);
        match ascent_direction(&reduced, &[0.0; NUM_INPUTS]) {
            Ok(direction) if !selected.is_empty() => {
                self.active = selected;
                let best = block.iter().map(Obs::mean).fold(f64::NEG_INFINITY, f64::max);
                let best_x = block[best_index(block).expect("non-empty block")].x.clone();
                Phase::Ascent {
                    coding: coding.clone(),
                    direction,
                    step: 0,
                    best,
                    best_x,
                    falls: 0,
                    last: coding.center.clone(),
                }
            }
            _ => {
                let vars = self.quadratic_vars(Some(&full));
                self.second_order_block(vars)
            }
        }
    }

    /// Ridge candidate from a second-order block, in natural units.
    fn ridge_candidate(&self, block: &[Obs], vars: &[usize], coding: &Coding) -> Result<Vec<f64>, RsmError> {
        let data = Arc::new(dataset(block).coded(coding));
        let fit = fit_ols(&data, &second_order(vars))?;
        let canon = ridge_analysis(&fit)?;
        let r = self.options.ridge_radius * (vars.len() as f64).sqrt();
        let coded = match (&canon.kind, &canon.stationary_point) {
            (StationaryKind::Maximum, Some(s)) if s.iter().map(|v| v * v).sum::<f64>().sqrt() <= r => s.clone(),
            _ => canon.max_on_sphere(r).ok_or(RsmError::NoDirection)?,
        };
        let mut u = vec![0.0; NUM_INPUTS];
        for (&j, v) in canon.variables.iter().zip(coded) {
            u[j] = v;
        }
        let mut x = coding.decode(&u);
        clamp_to(&mut x, &self.config.bounds);
        Ok(x)
    }

    fn recenter(&mut self, x: Vec<f64>) {
        self.center = x;
        self.shrink();
    }

    /// Decides what comes after the current phase finished.
    fn advance_phase(&mut self) {
        let phase = std::mem::replace(&mut self.phase, Phase::Start);
        self.phase = match phase {
            Phase::Block {
                second_order: None,
                runs,
                ..
            } => {
                let coding = coding_of(&self.region());
                self.analyze_first_order(&runs, coding)
            }
            Phase::Block {
                second_order: Some(vars),
                runs,
                ..
            } => {
                let coding = coding_of(&self.region());
                match self.ridge_candidate(&runs, &vars, &coding) {
                    Ok(x) => {
                        self.in_flight = Some((x, format!("ridge candidate on {}", self.var_names(&vars))));
                        Phase::Confirm { block: runs }
                    }
                    Err(_) => {
                        let best = runs[best_index(&runs).expect("non-empty block")].x.clone();
                        self.recenter(best);
                        self.first_order_block()
                    }
                }
            }
            Phase::Confirm { block } => {
                let best = block[best_index(&block).expect("non-empty block")].x.clone();
                self.recenter(best);
                self.active.clear();
                self.first_order_block()
            }
            Phase::Ascent { best_x, .. } => {
                self.recenter(best_x);
                self.first_order_block()
            }
            Phase::Start => self.first_order_block(),
        };
    }

    fn var_names(&self, vars: &[usize]) -> String {
        vars.iter().map(|&j| INPUT_NAMES[j]).collect::<Vec<_>>().join(",")
    }

    /// Next point of the current phase, or `None` if the phase is done.
    fn next_point(&mut self) -> Option<(Vec<f64>, String)> {
        if let Some(p) = self.in_flight.clone() {
            return Some(p);
        }
        let max_steps = self.options.max_steps;
        let step_size = self.options.step;
        let bounds = self.config.bounds.clone();
        let active = self.var_names(&self.active);
        match &mut self.phase {
            Phase::Start | Phase::Confirm { .. } => None,
            Phase::Block {
                second_order,
                pending,
                ..
            } => pending.pop_front().map(|x| {
                let label = if second_order.is_some() { "second-order" } else { "first-order" };
                (x, format!("{label} design, {} left", pending.len()))
            }),
            Phase::Ascent {
                coding,
                direction,
                step,
                last,
                ..
            } => {
                if *step >= max_steps {
                    return None;
                }
                *step += 1;
                let u: Vec<f64> = direction.iter().map(|d| d * step_size * *step as f64).collect();
                let mut x = coding.decode(&u);
                clamp_to(&mut x, &bounds);
                if x.iter().zip(last.iter()).all(|(a, b)| (a - b).abs() < 1e-9) {
                    return None;
                }
                *last = x.clone();
                Some((x, format!("ascent step {step} on {active}")))
            }
        }
    }
}

impl Strategy for ClassicalAgent {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Classical
    }

    fn begin_week(&mut self, _week: u32, _total_weeks: u32, history: &[ExportRow]) -> Result<(), StrategyError> {
        if matches!(self.phase, Phase::Start) {
            let obs: Vec<Obs> = history.iter().map(Obs::from).collect();
            if obs.is_empty() {
                self.center = self.config.bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect();
                self.half = self.config.bounds.iter().map(|(a, b)| 0.25 * (b - a)).collect();
                self.phase = self.first_order_block();
            } else {
                let xs: Vec<Vec<f64>> = obs.iter().map(|o| o.x.clone()).collect();
                let coding = Coding::from_inputs(&xs);
                self.center = coding.center.clone();
                self.half = coding.half_range.clone();
                self.phase = self.analyze_first_order(&obs, coding);
            }
        }
        Ok(())
    }

    fn next_run(&mut self, _status: &Status) -> Result<Option<Planned>, StrategyError> {
        // Every phase ends in a new block, so this settles quickly.
        for _ in 0..8 {
            if let Some((x, note)) = self.next_point() {
                self.in_flight = Some((x.clone(), note.clone()));
                return Ok(Some(Planned {
                    point: to_point(&x),
                    reps: self.reps(),
                    acquisition: None,
                    note,
                }));
            }
            self.advance_phase();
        }
        Ok(None)
    }

    fn observe(&mut self, run: &PlayerRun) {
        self.in_flight = None;
        let obs = Obs::from(run);
        let falls_needed = self.options.falls;
        let mut finished = false;
        match &mut self.phase {
            Phase::Block { runs, pending, .. } => {
                runs.push(obs);
                finished = pending.is_empty();
            }
            Phase::Ascent {
                best, best_x, falls, ..
            } => {
                let m = obs.mean();
                if m > *best {
                    *best = m;
                    *best_x = obs.x;
                    *falls = 0;
                } else {
                    *falls += 1;
                    finished = *falls >= falls_needed;
                }
            }
            Phase::Confirm { block } => {
                block.push(obs);
                finished = true;
            }
            Phase::Start => {}
        }
        if finished {
            self.advance_phase();
        }
    }
}
