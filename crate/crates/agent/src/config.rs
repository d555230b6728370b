//! Strategy and run-file configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use yieldgame_core::{GameConfig, MAX_REPS, NUM_INPUTS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {what} from {input:?}")]
pub struct ParseError {
    pub what: &'static str,
    pub input: String,
}

fn parse_error(what: &'static str, input: &str) -> ParseError {
    ParseError {
        what,
        input: input.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// First-order screen, stepwise, steepest ascent, then second-order ridge.
    Classical,
    /// Gaussian-process surrogate with expected improvement.
    Ei,
    /// Shrinking design around the incumbent, always at full replication.
    Replicator,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Classical, StrategyKind::Ei, StrategyKind::Replicator];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Classical => "classical",
            StrategyKind::Ei => "ei",
            StrategyKind::Replicator => "replicator",
        }
    }

    pub fn default_replicates(self) -> ReplicatePolicy {
        match self {
            StrategyKind::Classical => ReplicatePolicy::Fixed(2),
            StrategyKind::Ei => ReplicatePolicy::Adaptive,
            StrategyKind::Replicator => ReplicatePolicy::Fixed(MAX_REPS),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| parse_error("strategy", s))
    }
}

/// How much of the balance a week may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SpendPolicy {
    /// Keep running while the game admits runs.
    SpendAll,
    /// Only start a run that leaves at least `k` units; ignored in the final week.
    Reserve(i64),
}

impl SpendPolicy {
    /// Whether a run costing `cost` fits the policy given the current balance.
    pub fn allows(self, balance: i64, cost: i64, final_week: bool) -> bool {
        match self {
            SpendPolicy::SpendAll => true,
            SpendPolicy::Reserve(_) if final_week => true,
            SpendPolicy::Reserve(k) => balance - cost >= k,
        }
    }
}

impl fmt::Display for SpendPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpendPolicy::SpendAll => f.write_str("spend-all"),
            SpendPolicy::Reserve(k) => write!(f, "reserve-{k}"),
        }
    }
}

impl FromStr for SpendPolicy {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "spend-all" {
            return Ok(SpendPolicy::SpendAll);
        }
        s.strip_prefix("reserve-")
            .and_then(|k| k.parse().ok())
            .filter(|k: &i64| *k >= 0)
            .map(SpendPolicy::Reserve)
            .ok_or_else(|| parse_error("spend policy", s))
    }
}

impl TryFrom<String> for SpendPolicy {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SpendPolicy> for String {
    fn from(p: SpendPolicy) -> Self {
        p.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ReplicatePolicy {
    Fixed(u32),
    /// Let the strategy decide per run.
    Adaptive,
}

impl fmt::Display for ReplicatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplicatePolicy::Fixed(r) => write!(f, "fixed-{r}"),
            ReplicatePolicy::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl FromStr for ReplicatePolicy {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "adaptive" {
            return Ok(ReplicatePolicy::Adaptive);
        }
        s.strip_prefix("fixed-")
            .and_then(|r| r.parse().ok())
            .filter(|r| (1..=MAX_REPS).contains(r))
            .map(ReplicatePolicy::Fixed)
            .ok_or_else(|| parse_error("replicate policy", s))
    }
}

impl TryFrom<String> for ReplicatePolicy {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ReplicatePolicy> for String {
    fn from(p: ReplicatePolicy) -> Self {
        p.to_string()
    }
}

/// Default search box for every strategy, per input.
pub const DEFAULT_BOUNDS: (f64, f64) = (0.5, 20.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: StrategyKind,
    pub spend: SpendPolicy,
    pub replicates: ReplicatePolicy,
    /// Per-input search box in natural units.
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl StrategyConfig {
    pub fn new(strategy: StrategyKind, seed: u64) -> Self {
        Self {
            strategy,
            spend: SpendPolicy::SpendAll,
            replicates: strategy.default_replicates(),
            bounds: vec![DEFAULT_BOUNDS; NUM_INPUTS],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.bounds.len() != NUM_INPUTS {
            return Err(format!("bounds need {NUM_INPUTS} entries, got {}", self.bounds.len()));
        }
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi) {
                return Err(format!("bounds[{i}] = ({lo}, {hi}) must satisfy 0 < lo < hi"));
            }
        }
        Ok(())
    }
}

/// One player entry in a run file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerEntry {
    /// Token: initials plus PIN, e.g. `EI0001`.
    pub token: String,
    pub strategy: StrategyKind,
    #[serde(default)]
    pub spend: Option<SpendPolicy>,
    #[serde(default)]
    pub replicates: Option<ReplicatePolicy>,
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl PlayerEntry {
    pub fn strategy_config(&self, default_seed: u64) -> StrategyConfig {
        let mut cfg = StrategyConfig::new(self.strategy, self.seed.unwrap_or(default_seed));
        if let Some(s) = self.spend {
            cfg.spend = s;
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(b) = &self.bounds {
            cfg.bounds = b.clone();
        }
        cfg
    }
}

/// The single configuration file read by the command-line tool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub game: GameConfig,
    /// Snapshot file for local games.
    pub state: Option<PathBuf>,
    /// Base URL of a running server.
    pub server: Option<String>,
    pub admin_token: Option<String>,
    /// `host:port` for `serve`.
    pub listen: String,
    /// Directory for transcripts and leaderboard files.
    pub out_dir: PathBuf,
    pub players: Vec<PlayerEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            game: GameConfig::default(),
            state: None,
            server: None,
            admin_token: None,
            listen: "127.0.0.1:8080".into(),
            out_dir: PathBuf::from("out"),
            players: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
