//! Core of the yield optimization game.
//!
//! * [`sim`]: the deterministic yield surface, the week-indexed noise schedule
//!   and the stochastic observation process.
//! * [`engine`]: budget economy, week clock and run execution.
//! * [`store`]: snapshot persistence and the player-facing CSV export.
//! * [`leaderboard`]: best-so-far progress series, raw and de-noised.
//! * [`design`]: Latin hypercube sampling used to seed every game.

pub mod design;
pub mod engine;
pub mod leaderboard;
pub mod point;
pub mod rng;
pub mod sim;
pub mod store;
pub mod validate;

pub use engine::{
    replicate_cost, AdvanceOutcome, Game, GameClock, GameConfig, GameError, LedgerEntry,
    PlayerAccount, RunRecord, Token, TokenError, MAX_REPS,
};
pub use point::{InputPoint, INPUT_NAMES, NUM_INPUTS};
pub use rng::{GameRng, RngState};
pub use sim::{observe, yield_true, NoiseSchedule, Observation, SimError, YieldCoefficients};
