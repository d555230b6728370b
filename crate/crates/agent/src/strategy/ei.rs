use yieldgame_core::store::ExportRow;
use yieldgame_gp::{suggest_next, Acquisition, GpConfig, GpModel, SuggestConfig};
use yieldgame_server::api::{PlayerRun, Status};

use super::{to_point, Obs, Planned, Strategy, StrategyError};
use crate::config::{ReplicatePolicy, StrategyConfig, StrategyKind};

#[derive(Clone, Debug, PartialEq)]
pub struct EiOptions {
    pub gp: GpConfig,
    pub suggest: SuggestConfig,
    /// Runs at the start of the final week that go to the predicted
    /// maximum instead of the EI maximizer.
    pub final_exploit_runs: u32,
}

impl Default for EiOptions {
    fn default() -> Self {
        Self {
            gp: GpConfig::default(),
            suggest: SuggestConfig::default(),
            final_exploit_runs: 1,
        }
    }
}

/// Weekly GP refit plus expected improvement on the negated yield.
///
/// Hyperparameters are estimated once per week from the downloaded file;
/// within the week the model is refit at those hyperparameters after every
/// new result.
pub struct EiAgent {
    config: StrategyConfig,
    options: EiOptions,
    obs: Vec<Obs>,
    model: Option<GpModel>,
    stale: bool,
    week: u32,
    total_weeks: u32,
    runs_this_week: u32,
}

impl EiAgent {
    pub fn new(config: StrategyConfig, options: EiOptions) -> Self {
        Self {
            config,
            options,
            obs: Vec::new(),
            model: None,
            stale: true,
            week: 0,
            total_weeks: 0,
            runs_this_week: 0,
        }
    }

    fn training(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for o in &self.obs {
            for v in &o.yields {
                x.push(o.x.clone());
                y.push(-v);
            }
        }
        (x, y)
    }

    fn unique_sites(&self) -> Vec<Vec<f64>> {
        let mut sites: Vec<Vec<f64>> = Vec::new();
        for o in &self.obs {
            if !sites.contains(&o.x) {
                sites.push(o.x.clone());
            }
        }
        sites
    }

    fn full_fit(&mut self) -> Result<(), StrategyError> {
        let (x, y) = self.training();
        let gp = GpConfig {
            seed: self.config.seed ^ (u64::from(self.week) << 32),
            input_bounds: Some(self.config.bounds.clone()),
            ..self.options.gp.clone()
        };
        self.model = Some(GpModel::fit(&x, &y, &gp)?);
        self.stale = false;
        Ok(())
    }

    fn refresh(&mut self) -> Result<(), StrategyError> {
        if !self.stale {
            return Ok(());
        }
        let Some(model) = &self.model else {
            return self.full_fit();
        };
        let (x, y) = self.training();
        let h = model.hyperparameters().clone();
        match GpModel::fit_fixed(&x, &y, &h.theta, h.nugget, Some(self.config.bounds.clone())) {
            Ok(m) => {
                self.model = Some(m);
                self.stale = false;
                Ok(())
            }
            Err(_) => self.full_fit(),
        }
    }

    fn exploiting(&self) -> bool {
        self.week >= self.total_weeks && self.runs_this_week < self.options.final_exploit_runs
    }
}

impl Strategy for EiAgent {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Ei
    }

    fn begin_week(&mut self, week: u32, total_weeks: u32, history: &[ExportRow]) -> Result<(), StrategyError> {
        self.week = week;
        self.total_weeks = total_weeks;
        self.runs_this_week = 0;
        self.obs = history.iter().map(Obs::from).collect();
        self.full_fit()
    }

    fn next_run(&mut self, _status: &Status) -> Result<Option<Planned>, StrategyError> {
        self.refresh()?;
        let model = self.model.as_ref().expect("fitted above");
        let mode = if self.exploiting() {
            Acquisition::MeanOptimization
        } else {
            Acquisition::ExpectedImprovement
        };
        let cfg = SuggestConfig {
            mode,
            seed: self.config.seed.wrapping_add(u64::from(self.week) * 1000 + u64::from(self.runs_this_week)),
            ..self.options.suggest.clone()
        };
        let s = suggest_next(model, &self.unique_sites(), &self.config.bounds, &cfg);
        let reps = match self.config.replicates {
            ReplicatePolicy::Fixed(r) => r,
            ReplicatePolicy::Adaptive => s.recommended_reps,
        };
        let label = match s.kind {
            Acquisition::ExpectedImprovement => "ei",
            Acquisition::MeanOptimization => "mean",
        };
        Ok(Some(Planned {
            point: to_point(&s.x),
            reps,
            acquisition: Some(s.acquisition),
            note: format!(
                "{label}{} predicted={:.4} sd={:.4} incumbent={:.4}",
                if s.fell_back { " (fallback)" } else { "" },
                -s.mean,
                s.sd,
                -s.incumbent
            ),
        }))
    }

    fn observe(&mut self, run: &PlayerRun) {
        self.obs.push(Obs::from(run));
        self.runs_this_week += 1;
        self.stale = true;
    }
}
