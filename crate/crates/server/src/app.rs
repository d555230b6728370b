use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::Mutex;
use serde_json::Value;
use tokio::net::TcpListener;
use yieldgame_core::leaderboard::{leaderboard, View};
use yieldgame_core::store::{export_player_file, GameSnapshot, SnapshotStore};
use yieldgame_core::validate::validate_run_fields;
use yieldgame_core::{Game, PlayerAccount, Token};

use crate::api::*;
use crate::error::ApiError;

struct Inner {
    game: Mutex<Game>,
    store: Option<Arc<dyn SnapshotStore>>,
    admin_token: String,
}

/// Shared server state. Every request takes the single game lock, so the
/// API applies operations to the engine in a total order; a mutation is
/// kept only once the snapshot store has accepted it.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(game: Game, store: Option<Arc<dyn SnapshotStore>>, admin_token: impl Into<String>) -> Self {
        Self {
            inner: Arc::new(Inner {
                game: Mutex::new(game),
                store,
                admin_token: admin_token.into(),
            }),
        }
    }

    pub fn read<R>(&self, f: impl FnOnce(&Game) -> R) -> R {
        f(&self.inner.game.lock())
    }

    fn commit<R>(&self, f: impl FnOnce(&mut Game) -> Result<R, ApiError>) -> Result<R, ApiError> {
        let mut game = self.inner.game.lock();
        let before = self.inner.store.as_ref().map(|_| game.clone());
        let out = f(&mut game)?;
        if let (Some(store), Some(before)) = (&self.inner.store, before) {
            if let Err(e) = store.save(&GameSnapshot::of(&game)) {
                tracing::error!(error = %e, "snapshot save failed; change discarded");
                *game = before;
                return Err(ApiError::Storage(e.to_string()));
            }
        }
        Ok(out)
    }
}

fn credential(headers: &HeaderMap, query: &HashMap<String, String>) -> Result<String, ApiError> {
    if let Some(t) = query.get("token") {
        return Ok(t.trim().to_string());
    }
    headers
        .get(TOKEN_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(|s| s.trim().to_string())
        .ok_or(ApiError::MissingToken)
}

fn player_token(headers: &HeaderMap, query: &HashMap<String, String>) -> Result<Token, ApiError> {
    let raw = credential(headers, query)?;
    Token::parse(&raw).map_err(|e| ApiError::MalformedToken(e.to_string()))
}

fn account<'g>(game: &'g Game, token: &Token) -> Result<&'g PlayerAccount, ApiError> {
    game.account(token).ok_or(ApiError::UnknownPlayer)
}

fn status_of(game: &Game, account: &PlayerAccount) -> Status {
    Status::of(account, game.clock.current_week, game.clock.total_weeks, game.clock.runs_open())
}

fn require_admin(state: &AppState, headers: &HeaderMap, query: &HashMap<String, String>) -> Result<(), ApiError> {
    let given = credential(headers, query)?;
    if state.inner.admin_token.is_empty() || given != state.inner.admin_token {
        return Err(ApiError::Forbidden);
    }
    Ok(())
}

async fn status(State(state): State<AppState>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>) -> Result<Json<Status>, ApiError> {
    let token = player_token(&headers, &q)?;
    state.read(|g| Ok(Json(status_of(g, account(g, &token)?))))
}

async fn run(State(state): State<AppState>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>, body: Bytes) -> Result<Json<RunResponse>, ApiError> {
    let token = player_token(&headers, &q)?;
    let value: Value = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("body is not JSON: {e}")))?;
    let Value::Object(fields) = value else {
        return Err(ApiError::BadRequest("body must be a JSON object".into()));
    };
    state.commit(|g| {
        account(g, &token)?;
        let valid = validate_run_fields(&fields, g.config.max_input).map_err(ApiError::Validation)?;
        let record = g.execute_run(&token, &valid.point, valid.reps)?;
        let status = status_of(g, account(g, &token)?);
        Ok(Json(RunResponse {
            run: PlayerRun::from(&record),
            status,
        }))
    })
}

fn parse_usize(q: &HashMap<String, String>, key: &str) -> Result<Option<usize>, ApiError> {
    q.get(key)
        .map(|v| v.trim().parse::<usize>().map_err(|_| ApiError::BadRequest(format!("{key} must be a non-negative integer"))))
        .transpose()
}

async fn history(State(state): State<AppState>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>) -> Result<Json<HistoryPage>, ApiError> {
    let token = player_token(&headers, &q)?;
    let page = parse_usize(&q, "page")?.unwrap_or(1);
    let page_size = parse_usize(&q, "page_size")?.unwrap_or(DEFAULT_PAGE_SIZE);
    if page == 0 || page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(ApiError::BadRequest(format!("page must be >= 1 and page_size in 1..={MAX_PAGE_SIZE}")));
    }
    state.read(|g| {
        let a = account(g, &token)?;
        let total_runs = a.runs.len();
        let runs = a
            .runs
            .iter()
            .rev()
            .skip((page - 1) * page_size)
            .take(page_size)
            .map(PlayerRun::from)
            .collect();
        Ok(Json(HistoryPage {
            page,
            page_size,
            total_runs,
            total_pages: total_runs.div_ceil(page_size),
            runs,
        }))
    })
}

async fn download(State(state): State<AppState>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>) -> Result<Response, ApiError> {
    let token = player_token(&headers, &q)?;
    state.read(|g| {
        let a = account(g, &token)?;
        let body = export_player_file(a);
        let disposition = format!("attachment; filename=\"{}.csv\"", a.token.initials());
        Ok((
            [
                (header::CONTENT_TYPE, "text/csv; charset=utf-8".to_string()),
                (header::CONTENT_DISPOSITION, disposition),
            ],
            body,
        )
            .into_response())
    })
}

async fn leaderboard_route(State(state): State<AppState>, Query(q): Query<LeaderboardQuery>) -> Result<Json<LeaderboardResponse>, ApiError> {
    let view: View = match q.view.as_deref() {
        None | Some("") => View::ALL[0],
        Some(name) => name.parse().map_err(|e: yieldgame_core::leaderboard::UnknownView| ApiError::BadRequest(e.to_string()))?,
    };
    state.read(|g| {
        Ok(Json(LeaderboardResponse {
            view: view.to_string(),
            current_week: g.clock.current_week,
            series: leaderboard(g, view),
        }))
    })
}

async fn advance(State(state): State<AppState>, headers: HeaderMap, Query(q): Query<HashMap<String, String>>) -> Result<Json<AdvanceResponse>, ApiError> {
    require_admin(&state, &headers, &q)?;
    state.commit(|g| {
        let out = g.advance_week();
        let warning = out.clamped.then(|| format!("season ends at week {}; clock not advanced", g.clock.total_weeks));
        if let Some(w) = &warning {
            tracing::warn!("{w}");
        }
        Ok(Json(AdvanceResponse {
            week: out.week,
            clamped: out.clamped,
            accounts_credited: out.accounts_credited,
            warning,
        }))
    })
}

async fn provision(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> Result<(StatusCode, Json<Status>), ApiError> {
    require_admin(&state, &headers, &q)?;
    let req: ProvisionRequest = serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("expected {{\"player\": token}}: {e}")))?;
    state.commit(|g| {
        let token = g.provision(req.player.trim())?.token.clone();
        Ok((StatusCode::CREATED, Json(status_of(g, account(g, &token)?))))
    })
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/status", get(status))
        .route("/run", post(run))
        .route("/history", get(history))
        .route("/download", get(download))
        .route("/leaderboard", get(leaderboard_route))
        .route("/admin/advance", post(advance))
        .route("/admin/provision", post(provision))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
