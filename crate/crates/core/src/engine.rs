//! Rules of play: the weekly allowance, the replicate cost schedule, the
//! in-the-black gate, and the shared week-0 design.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::maximin_latin_hypercube;
use crate::point::{InputPoint, INPUT_NAMES, NUM_INPUTS};
use crate::rng::{GameRng, RngState};
use crate::sim::{observe, NoiseSchedule, SimError, YieldCoefficients};

pub const MAX_REPS: u32 = 10;

/// Marginal price of replicate `i` (1-based) is `MARGINAL_COST[i - 1]`.
const MARGINAL_COST: [i64; MAX_REPS as usize] = [10, 3, 3, 3, 2, 2, 2, 1, 1, 1];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Token(#[from] TokenError),
    #[error("no account for token")]
    UnknownPlayer,
    #[error("account {0} already exists")]
    DuplicatePlayer(String),
    #[error("runs are not open in week {0}")]
    RunsNotOpen(u32),
    #[error("run rejected: balance {balance} is not positive")]
    RunRejected { balance: i64 },
    #[error("replicate count {0} outside 1..=10")]
    InvalidReps(u32),
    #[error("{field} = {value} must be a finite, strictly positive number")]
    InvalidPoint { field: &'static str, value: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Total price of a run with `reps` replicates.
pub fn replicate_cost(reps: u32) -> Result<i64, GameError> {
    if !(1..=MAX_REPS).contains(&reps) {
        return Err(GameError::InvalidReps(reps));
    }
    Ok(MARGINAL_COST[..reps as usize].iter().sum())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TokenError {
    #[error("token must be 2-4 letters followed by a 4-digit PIN, got {0:?}")]
    Malformed(String),
}

/// Login token: player initials (2-4 ASCII letters) followed by a 4-digit PIN.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn parse(raw: &str) -> Result<Self, TokenError> {
        let bytes = raw.as_bytes();
        if bytes.len() < 6 || bytes.len() > 8 {
            return Err(TokenError::Malformed(raw.to_string()));
        }
        let (initials, pin) = bytes.split_at(bytes.len() - 4);
        let ok = (2..=4).contains(&initials.len())
            && initials.iter().all(u8::is_ascii_alphabetic)
            && pin.iter().all(u8::is_ascii_digit);
        if ok {
            Ok(Self(raw.to_string()))
        } else {
            Err(TokenError::Malformed(raw.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Public label: the initials with the PIN stripped.
    pub fn initials(&self) -> &str {
        &self.0[..self.0.len() - 4]
    }
}

impl TryFrom<String> for Token {
    type Error = TokenError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::parse(&value)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> Self {
        t.0
    }
}

// Debug output never carries the PIN.
impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Token({}****)", self.initials())
    }
}

/// An immutable record of one experiment.
///
/// Week-0 records are the shared initial design, written at zero cost; every
/// later record has `cost == replicate_cost(reps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: u32,
    pub week: u32,
    pub point: InputPoint,
    pub reps: u32,
    pub cost: i64,
    pub yields: Vec<f64>,
    /// Noise-free yield at `point`. Server-side only.
    pub true_yield: f64,
}

impl RunRecord {
    pub fn mean_yield(&self) -> f64 {
        self.yields.iter().sum::<f64>() / self.yields.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LedgerEntry {
    Accrual { week: u32, amount: i64 },
    Charge { week: u32, run_id: u32, amount: i64 },
}

impl LedgerEntry {
    pub fn signed_amount(&self) -> i64 {
        match self {
            Self::Accrual { amount, .. } => *amount,
            Self::Charge { amount, .. } => -amount,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameClock {
    pub current_week: u32,
    pub total_weeks: u32,
    pub weekly_allowance: i64,
}

impl Default for GameClock {
    fn default() -> Self {
        Self {
            current_week: 0,
            total_weeks: 13,
            weekly_allowance: 100,
        }
    }
}

impl GameClock {
    pub fn runs_open(&self) -> bool {
        self.current_week >= 1 && self.current_week <= self.total_weeks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerAccount {
    pub token: Token,
    pub created_week: u32,
    pub ledger: Vec<LedgerEntry>,
    pub runs: Vec<RunRecord>,
    pub rng: RngState,
}

impl PlayerAccount {
    pub fn new(token: Token, created_week: u32, initial: &[RunRecord], rng: RngState) -> Self {
        Self {
            token,
            created_week,
            ledger: Vec::new(),
            runs: initial.to_vec(),
            rng,
        }
    }

    pub fn balance(&self) -> i64 {
        self.ledger.iter().map(LedgerEntry::signed_amount).sum()
    }

    pub fn accrued(&self) -> i64 {
        self.ledger
            .iter()
            .filter_map(|e| match e {
                LedgerEntry::Accrual { amount, .. } => Some(*amount),
                LedgerEntry::Charge { .. } => None,
            })
            .sum()
    }

    pub fn spent(&self) -> i64 {
        self.accrued() - self.balance()
    }

    /// In the black: strictly positive balance.
    pub fn can_run(&self) -> bool {
        self.balance() > 0
    }

    pub fn has_accrued(&self, week: u32) -> bool {
        self.ledger
            .iter()
            .any(|e| matches!(e, LedgerEntry::Accrual { week: w, .. } if *w == week))
    }

    /// Credits the weekly allowance for `clock.current_week`. Returns `false`
    /// (and changes nothing) if that week was already credited.
    pub fn accrue_week(&mut self, clock: &GameClock) -> bool {
        if self.has_accrued(clock.current_week) {
            return false;
        }
        self.ledger.push(LedgerEntry::Accrual {
            week: clock.current_week,
            amount: clock.weekly_allowance,
        });
        true
    }

    /// Runs that cost budget (everything after the initial design).
    pub fn paid_runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(|r| r.week >= 1)
    }

    /// Gate check, observation, deduction and append as one step: on any
    /// error the account is untouched.
    pub fn execute_run(
        &mut self,
        point: &InputPoint,
        reps: u32,
        clock: &GameClock,
        schedule: &NoiseSchedule,
        surface: &YieldCoefficients,
    ) -> Result<&RunRecord, GameError> {
        if !clock.runs_open() {
            return Err(GameError::RunsNotOpen(clock.current_week));
        }
        let balance = self.balance();
        if balance <= 0 {
            return Err(GameError::RunRejected { balance });
        }
        let cost = replicate_cost(reps)?;
        check_positive(point)?;

        let mut rng = GameRng::restore(self.rng);
        let obs = observe(surface, schedule, point, clock.current_week, reps, &mut rng)?;
        let run_id = self.runs.last().map_or(1, |r| r.run_id + 1);

        self.rng = rng.state();
        self.ledger.push(LedgerEntry::Charge {
            week: clock.current_week,
            run_id,
            amount: cost,
        });
        self.runs.push(RunRecord {
            run_id,
            week: clock.current_week,
            point: *point,
            reps,
            cost,
            yields: obs.noisy_yields,
            true_yield: obs.true_yield,
        });
        Ok(self.runs.last().expect("just pushed"))
    }
}

fn check_positive(point: &InputPoint) -> Result<(), GameError> {
    for (i, v) in point.to_array().into_iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(GameError::InvalidPoint {
                field: INPUT_NAMES[i],
                value: v,
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialDesignConfig {
    pub points: usize,
    pub reps: u32,
    /// Per-coordinate box, in [`INPUT_NAMES`] order.
    pub bounds: [(f64, f64); NUM_INPUTS],
    /// Random LHS candidates scored before the swap refinement.
    pub candidates: usize,
}

impl Default for InitialDesignConfig {
    fn default() -> Self {
        Self {
            points: 7,
            reps: 5,
            // N, P, K, Na, Ca, Mg, Nx
            bounds: [
                (1.0, 5.0),
                (1.0, 5.0),
                (1.0, 5.0),
                (1.0, 5.0),
                (1.0, 4.0),
                (5.0, 10.0),
                (1.0, 10.0),
            ],
            candidates: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub seed: u64,
    pub total_weeks: u32,
    pub weekly_allowance: i64,
    pub schedule: NoiseSchedule,
    pub surface: YieldCoefficients,
    pub initial_design: InitialDesignConfig,
    /// Upper bound on any submitted coordinate (API policy).
    pub max_input: f64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            total_weeks: 13,
            weekly_allowance: 100,
            schedule: NoiseSchedule::default(),
            surface: YieldCoefficients::default(),
            initial_design: InitialDesignConfig::default(),
            max_input: 1000.0,
        }
    }
}

impl GameConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvanceOutcome {
    pub week: u32,
    /// The clock was already at `total_weeks`; nothing changed.
    pub clamped: bool,
    pub accounts_credited: usize,
}

/// Whole-game state. All mutation goes through `&mut self`, so a caller
/// holding the game behind one lock gets per-account serialization for free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Game {
    pub config: GameConfig,
    pub clock: GameClock,
    pub initial_design: Vec<RunRecord>,
    pub accounts: BTreeMap<Token, PlayerAccount>,
    pub next_stream: u64,
    /// Bumped on every mutation; lets stores drop stale snapshots.
    pub revision: u64,
}

impl Game {
    pub fn new(config: GameConfig) -> Self {
        let initial_design = seed_initial_design(&config);
        let clock = GameClock {
            current_week: 0,
            total_weeks: config.total_weeks,
            weekly_allowance: config.weekly_allowance,
        };
        Self {
            config,
            clock,
            initial_design,
            accounts: BTreeMap::new(),
            next_stream: 1,
            revision: 0,
        }
    }

    pub fn account(&self, token: &Token) -> Option<&PlayerAccount> {
        self.accounts.get(token)
    }

    pub fn lookup(&self, raw: &str) -> Result<&PlayerAccount, GameError> {
        let token = Token::parse(raw)?;
        self.accounts.get(&token).ok_or(GameError::UnknownPlayer)
    }

    /// Creates an account holding the shared initial design, credited for
    /// every week up to and including the current one.
    pub fn provision(&mut self, raw: &str) -> Result<&PlayerAccount, GameError> {
        let token = Token::parse(raw)?;
        if self.accounts.contains_key(&token) {
            return Err(GameError::DuplicatePlayer(token.initials().to_string()));
        }
        let rng = RngState::new(self.config.seed, self.next_stream);
        self.next_stream += 1;
        let mut account = PlayerAccount::new(
            token.clone(),
            self.clock.current_week,
            &self.initial_design,
            rng,
        );
        for week in 0..=self.clock.current_week {
            let clock = GameClock {
                current_week: week,
                ..self.clock
            };
            account.accrue_week(&clock);
        }
        self.revision += 1;
        Ok(self.accounts.entry(token).or_insert(account))
    }

    /// Moves to the next week and credits every account once.
    pub fn advance_week(&mut self) -> AdvanceOutcome {
        let clamped = self.clock.current_week >= self.clock.total_weeks;
        if !clamped {
            self.clock.current_week += 1;
        }
        let clock = self.clock;
        let accounts_credited = self
            .accounts
            .values_mut()
            .map(|a| a.accrue_week(&clock))
            .filter(|credited| *credited)
            .count();
        if !clamped || accounts_credited > 0 {
            self.revision += 1;
        }
        AdvanceOutcome {
            week: clock.current_week,
            clamped,
            accounts_credited,
        }
    }

    pub fn execute_run(
        &mut self,
        token: &Token,
        point: &InputPoint,
        reps: u32,
    ) -> Result<RunRecord, GameError> {
        let clock = self.clock;
        let schedule = self.config.schedule;
        let surface = self.config.surface;
        let account = self
            .accounts
            .get_mut(token)
            .ok_or(GameError::UnknownPlayer)?;
        let record = account
            .execute_run(point, reps, &clock, &schedule, &surface)?
            .clone();
        self.revision += 1;
        Ok(record)
    }
}

/// Generates the week-0 design shared by every account: a maximin LHS over
/// the configured box, each point observed `reps` times at the week-0
/// noise variance. Uses stream 0 of the game seed.
pub fn seed_initial_design(config: &GameConfig) -> Vec<RunRecord> {
    let design = &config.initial_design;
    let mut rng = GameRng::new(config.seed, 0);
    let rows = maximin_latin_hypercube(design.points, &design.bounds, design.candidates, &mut rng);
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let point = InputPoint::from_slice(row);
            let obs = observe(
                &config.surface,
                &config.schedule,
                &point,
                0,
                design.reps,
                &mut rng,
            )
            .expect("initial design lies inside the domain");
            RunRecord {
                run_id: i as u32 + 1,
                week: 0,
                point,
                reps: design.reps,
                cost: 0,
                yields: obs.noisy_yields,
                true_yield: obs.true_yield,
            }
        })
        .collect()
}
