//! How a strategy talks to a game: in process, or over HTTP.

use std::sync::Arc;

use parking_lot::Mutex;
use serde_json::json;
use thiserror::Error;
use yieldgame_core::store::export_player_file;
use yieldgame_core::{Game, GameError, InputPoint, Token, INPUT_NAMES};
use yieldgame_server::api::{AdvanceResponse, ErrorBody, LeaderboardResponse, PlayerRun, RunResponse, Status, TOKEN_HEADER};

#[derive(Debug, Error)]
pub enum ClientError {
    /// The game refused the request; `kind` is the API error code.
    #[error("{kind}: {message}")]
    Rejected { kind: String, message: String },
    #[error("transport: {0}")]
    Transport(String),
}

impl From<GameError> for ClientError {
    fn from(e: GameError) -> Self {
        let kind = match &e {
            GameError::Token(_) => "malformed_token",
            GameError::UnknownPlayer => "unknown_player",
            GameError::DuplicatePlayer(_) => "duplicate_player",
            GameError::RunsNotOpen(_) => "runs_not_open",
            GameError::RunRejected { .. } => "run_rejected",
            _ => "validation",
        };
        ClientError::Rejected {
            kind: kind.into(),
            message: e.to_string(),
        }
    }
}

/// A player's view of the game.
pub trait GameClient {
    fn status(&mut self) -> Result<Status, ClientError>;
    fn submit(&mut self, point: &InputPoint, reps: u32) -> Result<RunResponse, ClientError>;
    /// The export file, verbatim.
    fn download(&mut self) -> Result<String, ClientError>;
}

/// Moves the shared clock forward; only the game operator holds one.
pub trait WeekClock {
    fn advance(&mut self) -> Result<AdvanceResponse, ClientError>;
}

pub type SharedGame = Arc<Mutex<Game>>;

/// Plays directly against an in-memory game.
#[derive(Clone)]
pub struct LocalClient {
    game: SharedGame,
    token: Token,
}

impl LocalClient {
    pub fn new(game: SharedGame, token: Token) -> Self {
        Self { game, token }
    }
}

fn local_status(game: &Game, token: &Token) -> Result<Status, ClientError> {
    let account = game.account(token).ok_or(GameError::UnknownPlayer)?;
    Ok(Status::of(account, game.clock.current_week, game.clock.total_weeks, game.clock.runs_open()))
}

impl GameClient for LocalClient {
    fn status(&mut self) -> Result<Status, ClientError> {
        local_status(&self.game.lock(), &self.token)
    }

    fn submit(&mut self, point: &InputPoint, reps: u32) -> Result<RunResponse, ClientError> {
        let mut game = self.game.lock();
        if point.to_array().iter().any(|v| *v > game.config.max_input) {
            return Err(ClientError::Rejected {
                kind: "validation".into(),
                message: format!("coordinate above {}", game.config.max_input),
            });
        }
        let record = game.execute_run(&self.token, point, reps)?;
        Ok(RunResponse {
            run: PlayerRun::from(&record),
            status: local_status(&game, &self.token)?,
        })
    }

    fn download(&mut self) -> Result<String, ClientError> {
        let game = self.game.lock();
        let account = game.account(&self.token).ok_or(GameError::UnknownPlayer)?;
        Ok(export_player_file(account))
    }
}

/// Operator clock for an in-memory game.
pub struct LocalClock(pub SharedGame);

impl WeekClock for LocalClock {
    fn advance(&mut self) -> Result<AdvanceResponse, ClientError> {
        let mut game = self.0.lock();
        let out = game.advance_week();
        Ok(AdvanceResponse {
            week: out.week,
            clamped: out.clamped,
            accounts_credited: out.accounts_credited,
            warning: None,
        })
    }
}

/// Blocking HTTP client for a running server.
pub struct HttpClient {
    base: String,
    credential: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    /// `credential` is a player token, or the admin secret for [`WeekClock`]
    /// and [`HttpClient::provision`].
    pub fn new(base: &str, credential: &str) -> Self {
        Self {
            base: base.trim_end_matches('/').to_string(),
            credential: credential.to_string(),
            http: reqwest::blocking::Client::new(),
        }
    }

    fn send(&self, req: reqwest::blocking::RequestBuilder) -> Result<reqwest::blocking::Response, ClientError> {
        let res = req
            .header(TOKEN_HEADER, &self.credential)
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        if res.status().is_success() {
            return Ok(res);
        }
        let code = res.status();
        let text = res.text().unwrap_or_default();
        Err(match serde_json::from_str::<ErrorBody>(&text) {
            Ok(body) => ClientError::Rejected {
                kind: body.error,
                message: body.message,
            },
            Err(_) => ClientError::Transport(format!("HTTP {code}: {text}")),
        })
    }

    fn json<T: serde::de::DeserializeOwned>(res: reqwest::blocking::Response) -> Result<T, ClientError> {
        res.json().map_err(|e| ClientError::Transport(e.to_string()))
    }

    pub fn provision(&self, player: &str) -> Result<Status, ClientError> {
        let res = self.send(self.http.post(format!("{}/admin/provision", self.base)).json(&json!({ "player": player })))?;
        Self::json(res)
    }

    pub fn leaderboard(&self, view: &str) -> Result<LeaderboardResponse, ClientError> {
        let res = self.send(self.http.get(format!("{}/leaderboard?view={view}", self.base)))?;
        Self::json(res)
    }
}

impl GameClient for HttpClient {
    fn status(&mut self) -> Result<Status, ClientError> {
        let res = self.send(self.http.get(format!("{}/status", self.base)))?;
        Self::json(res)
    }

    fn submit(&mut self, point: &InputPoint, reps: u32) -> Result<RunResponse, ClientError> {
        let mut body = serde_json::Map::new();
        for (name, v) in INPUT_NAMES.iter().zip(point.to_array()) {
            body.insert(name.to_string(), json!(v));
        }
        body.insert("reps".into(), json!(reps));
        let res = self.send(self.http.post(format!("{}/run", self.base)).json(&body))?;
        Self::json(res)
    }

    fn download(&mut self) -> Result<String, ClientError> {
        let res = self.send(self.http.get(format!("{}/download", self.base)))?;
        res.text().map_err(|e| ClientError::Transport(e.to_string()))
    }
}

impl WeekClock for HttpClient {
    fn advance(&mut self) -> Result<AdvanceResponse, ClientError> {
        let res = self.send(self.http.post(format!("{}/admin/advance", self.base)))?;
        Self::json(res)
    }
}
