//! Wire types. Nothing here carries a true yield or noise parameter.

use serde::{Deserialize, Serialize};
use yieldgame_core::leaderboard::LeaderboardSeries;
use yieldgame_core::validate::FieldError;
use yieldgame_core::{InputPoint, PlayerAccount, RunRecord};

pub const TOKEN_HEADER: &str = "x-game-token";
pub const DEFAULT_PAGE_SIZE: usize = 10;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub player: String,
    pub current_week: u32,
    pub total_weeks: u32,
    pub spent: i64,
    pub accrued: i64,
    pub balance: i64,
    /// Whether a run submitted now would be admitted.
    pub can_run: bool,
}

impl Status {
    pub fn of(account: &PlayerAccount, current_week: u32, total_weeks: u32, runs_open: bool) -> Self {
        Self {
            player: account.token.initials().to_string(),
            current_week,
            total_weeks,
            spent: account.spent(),
            accrued: account.accrued(),
            balance: account.balance(),
            can_run: runs_open && account.can_run(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerRun {
    pub run_id: u32,
    pub week: u32,
    pub point: InputPoint,
    pub reps: u32,
    pub cost: i64,
    pub yields: Vec<f64>,
}

impl From<&RunRecord> for PlayerRun {
    fn from(r: &RunRecord) -> Self {
        Self {
            run_id: r.run_id,
            week: r.week,
            point: r.point,
            reps: r.reps,
            cost: r.cost,
            yields: r.yields.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResponse {
    pub run: PlayerRun,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPage {
    pub page: usize,
    pub page_size: usize,
    pub total_runs: usize,
    pub total_pages: usize,
    pub runs: Vec<PlayerRun>,
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct HistoryQuery {
    pub page: Option<usize>,
    pub page_size: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
pub struct LeaderboardQuery {
    pub view: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardResponse {
    pub view: String,
    pub current_week: u32,
    pub series: Vec<LeaderboardSeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvisionRequest {
    pub player: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvanceResponse {
    pub week: u32,
    pub clamped: bool,
    pub accounts_credited: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<FieldError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<i64>,
}
