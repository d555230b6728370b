//! Scripted players for the yield game and the plumbing to run them.
//!
//! * [`strategy`]: the classical response-surface agent, the expected
//!   improvement agent and the replicator.
//! * [`season`]: week-by-week play against any [`client::GameClient`],
//!   alone or as a league sharing one clock.
//! * [`client`]: in-process and HTTP access to a game.
//! * [`transcript`] and [`plots`]: CSV output.

pub mod client;
pub mod config;
pub mod plots;
pub mod season;
pub mod strategy;
pub mod transcript;

pub use client::{ClientError, GameClient, HttpClient, LocalClient, LocalClock, SharedGame, WeekClock};
pub use config::{ReplicatePolicy, RunConfig, SpendPolicy, StrategyConfig, StrategyKind};
pub use season::{league, play_season, play_week, Seat, SeasonError};
pub use strategy::{build, Planned, Strategy, StrategyError};
pub use transcript::{Event, Transcript, TranscriptRow};

use std::sync::Arc;

use parking_lot::Mutex;
use yieldgame_core::{Game, GameConfig, GameError, Token};

/// An in-memory game with one seat per strategy, sharing a clock.
pub struct LocalLeague {
    pub game: SharedGame,
    pub seats: Vec<Seat<LocalClient>>,
}

impl LocalLeague {
    pub fn new(config: GameConfig) -> Self {
        Self {
            game: Arc::new(Mutex::new(Game::new(config))),
            seats: Vec::new(),
        }
    }

    /// Provisions `token` and seats a strategy for it.
    pub fn join(&mut self, token: &str, config: &StrategyConfig) -> Result<(), JoinError> {
        let strategy = build(config)?;
        let parsed = Token::parse(token).map_err(GameError::from)?;
        self.game.lock().provision(token)?;
        self.seats.push(Seat::new(strategy, LocalClient::new(self.game.clone(), parsed), config.spend));
        Ok(())
    }

    pub fn play(&mut self) -> Result<Transcript, SeasonError> {
        let mut clock = LocalClock(self.game.clone());
        let mut seats: Vec<&mut Seat<LocalClient>> = self.seats.iter_mut().collect();
        league(&mut seats, &mut clock)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum JoinError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
}
