use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use yieldgame_core::design::latin_hypercube;
use yieldgame_core::store::ExportRow;
use yieldgame_core::MAX_REPS;
use yieldgame_server::api::{PlayerRun, Status};

use super::{best_index, local_box, to_point, Obs, Planned, Strategy, StrategyError};
use crate::config::{ReplicatePolicy, StrategyConfig, StrategyKind};

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicatorOptions {
    /// Points per Latin hypercube batch; a new batch follows when one runs
    /// out before the budget does.
    pub points_per_week: usize,
    /// Half-width in week 1, as a fraction of each bound's width.
    pub initial_half_width: f64,
    /// Per-week multiplier on the half-width.
    pub shrink: f64,
}

impl Default for ReplicatorOptions {
    fn default() -> Self {
        Self {
            points_per_week: 4,
            initial_half_width: 0.25,
            shrink: 0.8,
        }
    }
}

/// Each week, a small Latin hypercube in a shrinking box around the best
/// run mean, every point at full replication.
pub struct ReplicatorAgent {
    config: StrategyConfig,
    options: ReplicatorOptions,
    queue: VecDeque<Vec<f64>>,
    region: Vec<(f64, f64)>,
    rng: ChaCha20Rng,
}

impl ReplicatorAgent {
    pub fn new(config: StrategyConfig, options: ReplicatorOptions) -> Self {
        Self {
            config,
            options,
            queue: VecDeque::new(),
            region: Vec::new(),
            rng: ChaCha20Rng::seed_from_u64(0),
        }
    }
}

impl Strategy for ReplicatorAgent {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Replicator
    }

    fn begin_week(&mut self, week: u32, _total_weeks: u32, history: &[ExportRow]) -> Result<(), StrategyError> {
        let obs: Vec<Obs> = history.iter().map(Obs::from).collect();
        let bounds = &self.config.bounds;
        let center = match best_index(&obs) {
            Some(i) => obs[i].x.clone(),
            None => bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
        };
        let factor = self.options.initial_half_width * self.options.shrink.powi(week.saturating_sub(1) as i32);
        let half: Vec<f64> = bounds.iter().map(|(lo, hi)| factor * (hi - lo)).collect();
        self.region = local_box(&center, &half, bounds);
        self.rng = ChaCha20Rng::seed_from_u64(self.config.seed);
        self.rng.set_stream(u64::from(week));
        self.queue.clear();
        Ok(())
    }

    fn next_run(&mut self, _status: &Status) -> Result<Option<Planned>, StrategyError> {
        let reps = match self.config.replicates {
            ReplicatePolicy::Fixed(r) => r,
            ReplicatePolicy::Adaptive => MAX_REPS,
        };
        if self.queue.is_empty() && !self.region.is_empty() {
            self.queue = latin_hypercube(self.options.points_per_week, &self.region, &mut self.rng).into();
        }
        Ok(self.queue.pop_front().map(|x| Planned {
            point: to_point(&x),
            reps,
            acquisition: None,
            note: format!("design point, {} left in batch", self.queue.len()),
        }))
    }

    fn observe(&mut self, _run: &PlayerRun) {}
}
