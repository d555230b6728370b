use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;
use yieldgame_core::store::{export_player_file, parse_export, GameSnapshot, JsonFileStore, SnapshotStore, StoreError};
use yieldgame_core::{Game, GameConfig, InputPoint, Token};
use yieldgame_server::{router, AppState};

const ADMIN: &str = "letmein";

fn state_at_week(week: u32) -> AppState {
    let mut game = Game::new(GameConfig::with_seed(99));
    for _ in 0..week {
        game.advance_week();
    }
    AppState::new(game, None, ADMIN)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, text) = call(app, method, uri, body).await;
    (s, serde_json::from_str(&text).unwrap_or(Value::Null))
}

async fn provision(app: &Router, token: &str) -> (StatusCode, Value) {
    call_json(app, "POST", &format!("/admin/provision?token={ADMIN}"), Some(json!({ "player": token }))).await
}

fn run_body(reps: u32) -> Value {
    json!({"N": 8, "P": 5, "K": 6, "Na": 2, "Ca": 4, "Mg": 10, "Nx": 3, "reps": reps})
}

#[tokio::test]
async fn fresh_account_status_and_auth_errors() {
    let app = router(state_at_week(1));
    let (s, body) = provision(&app, "rbg4036").await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["player"], "rbg");
    let (s, body) = call_json(&app, "GET", "/status?token=rbg4036", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["balance"], 200);
    assert_eq!(body["accrued"], 200);
    assert_eq!(body["spent"], 0);
    assert_eq!(body["can_run"], true);
    assert_eq!(body["current_week"], 1);

    let (s, body) = call_json(&app, "GET", "/status?token=abc1234", None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    assert_eq!(body["error"], "unknown_player");
    let (s, body) = call_json(&app, "GET", "/status?token=r1", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "malformed_token");
    let (s, _) = call_json(&app, "GET", "/status", None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);

    let req = Request::builder().uri("/status").header("x-game-token", "rbg4036").body(Body::empty()).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::OK);
}

#[tokio::test]
async fn runs_charge_and_gate() {
    let app = router(state_at_week(1));
    provision(&app, "rbg4036").await;
    let (s, text) = call(&app, "POST", "/run?token=rbg4036", Some(run_body(10))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(!text.contains("true_yield"));
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["run"]["reps"], 10);
    assert_eq!(body["run"]["yields"].as_array().unwrap().len(), 10);
    assert_eq!(body["status"]["spent"], 28);

    // 172 left: six more 10-rep runs take it to 4, the seventh overdraws.
    for _ in 0..7 {
        let (s, _) = call(&app, "POST", "/run?token=rbg4036", Some(run_body(10))).await;
        assert_eq!(s, StatusCode::OK);
    }
    let (_, st) = call_json(&app, "GET", "/status?token=rbg4036", None).await;
    assert_eq!(st["balance"], 200 - 8 * 28);
    assert_eq!(st["can_run"], false);
    let (s, body) = call_json(&app, "POST", "/run?token=rbg4036", Some(run_body(1))).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    assert_eq!(body["error"], "run_rejected");
    assert_eq!(body["balance"], 200 - 8 * 28);
}

#[tokio::test]
async fn validation_errors_name_fields() {
    let app = router(state_at_week(1));
    provision(&app, "rbg4036").await;
    let mut missing = run_body(2);
    missing.as_object_mut().unwrap().remove("Mg");
    let (s, body) = call_json(&app, "POST", "/run?token=rbg4036", Some(missing)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["errors"][0]["field"], "Mg");
    assert_eq!(body["errors"][0]["code"], "missing");

    let mut negative = run_body(2);
    negative["N"] = json!(-1);
    let (s, body) = call_json(&app, "POST", "/run?token=rbg4036", Some(negative)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["errors"][0]["field"], "N");
    assert_eq!(body["errors"][0]["code"], "not_positive");

    let (s, _) = call(&app, "POST", "/run?token=rbg4036", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (_, st) = call_json(&app, "GET", "/status?token=rbg4036", None).await;
    assert_eq!(st["spent"], 0);
}

#[tokio::test]
async fn runs_closed_before_week_one() {
    let app = router(state_at_week(0));
    provision(&app, "rbg4036").await;
    let (_, st) = call_json(&app, "GET", "/status?token=rbg4036", None).await;
    assert_eq!(st["balance"], 100);
    assert_eq!(st["can_run"], false);
    let (s, body) = call_json(&app, "POST", "/run?token=rbg4036", Some(run_body(1))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "runs_not_open");
}

#[tokio::test]
async fn history_pages_newest_first_and_download_round_trips() {
    let state = state_at_week(1);
    let app = router(state.clone());
    provision(&app, "rbg4036").await;
    for _ in 0..16 {
        let (s, _) = call(&app, "POST", "/run?token=rbg4036", Some(run_body(1))).await;
        assert_eq!(s, StatusCode::OK);
    }
    let (s, p1) = call_json(&app, "GET", "/history?token=rbg4036&page_size=10", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p1["total_runs"], 23);
    assert_eq!(p1["total_pages"], 3);
    assert_eq!(p1["runs"][0]["run_id"], 23);
    let (_, p3) = call_json(&app, "GET", "/history?token=rbg4036&page=3&page_size=10", None).await;
    assert_eq!(p3["runs"].as_array().unwrap().len(), 3);
    assert_eq!(p3["runs"][2]["run_id"], 1);
    let (s, _) = call_json(&app, "GET", "/history?token=rbg4036&page=0", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (_, whole) = call(&app, "GET", "/history?token=rbg4036&page_size=100", None).await;
    assert!(!whole.contains("true_yield"));

    let (s, csv) = call(&app, "GET", "/download?token=rbg4036", None).await;
    assert_eq!(s, StatusCode::OK);
    let token = Token::parse("rbg4036").unwrap();
    let expected = state.read(|g| export_player_file(g.account(&token).unwrap()));
    assert_eq!(csv, expected);
    let rows = parse_export(&csv).unwrap();
    let runs = state.read(|g| g.account(&token).unwrap().runs.clone());
    assert_eq!(rows.len(), runs.len());
    for (row, run) in rows.iter().zip(runs.iter().rev()) {
        assert_eq!(row.week, run.week);
        assert_eq!(row.point, run.point);
        assert_eq!(row.yields, run.yields);
    }
}

#[tokio::test]
async fn leaderboard_is_public_masked_and_normalized() {
    let app = router(state_at_week(1));
    provision(&app, "rbg4036").await;
    provision(&app, "xyz0007").await;
    call(&app, "POST", "/run?token=rbg4036", Some(run_body(3))).await;
    call(&app, "POST", "/run?token=xyz0007", Some(json!({"N": 11, "P": 6, "K": 8, "Na": 4, "Ca": 5, "Mg": 20, "Nx": 1, "reps": 2}))).await;
    for view in ["by_week", "by_run", "by_week_raw", "by_run_raw"] {
        let (s, text) = call(&app, "GET", &format!("/leaderboard?view={view}"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert!(!text.contains("true_yield") && !text.contains("4036") && !text.contains("0007"));
        let body: Value = serde_json::from_str(&text).unwrap();
        let series = body["series"].as_array().unwrap();
        assert_eq!(series.len(), 2);
        let mut global = f64::NEG_INFINITY;
        for s in series {
            let vals: Vec<f64> = s["points"].as_array().unwrap().iter().map(|p| p["value"].as_f64().unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0]));
            global = global.max(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        if !view.ends_with("raw") {
            assert_eq!(global, 1.0);
        }
    }
    let (s, _) = call(&app, "GET", "/leaderboard?view=sideways", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn admin_routes() {
    let app = router(state_at_week(3));
    provision(&app, "rbg4036").await;
    provision(&app, "ab1234").await;
    let (s, body) = provision(&app, "rbg4036").await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["error"], "duplicate_player");
    let (s, _) = provision(&app, "r1").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, _) = call_json(&app, "POST", "/admin/advance?token=rbg4036", None).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    let (s, _) = call_json(&app, "POST", "/admin/provision?token=wrong", Some(json!({"player": "cd5555"}))).await;
    assert_eq!(s, StatusCode::FORBIDDEN);

    let (_, before) = call_json(&app, "GET", "/status?token=ab1234", None).await;
    let (s, body) = call_json(&app, "POST", &format!("/admin/advance?token={ADMIN}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["week"], 4);
    assert_eq!(body["accounts_credited"], 2);
    let (_, after) = call_json(&app, "GET", "/status?token=ab1234", None).await;
    assert_eq!(after["balance"].as_i64().unwrap(), before["balance"].as_i64().unwrap() + 100);

    for _ in 4..13 {
        call_json(&app, "POST", &format!("/admin/advance?token={ADMIN}"), None).await;
    }
    let (_, body) = call_json(&app, "POST", &format!("/admin/advance?token={ADMIN}"), None).await;
    assert_eq!(body["week"], 13);
    assert_eq!(body["clamped"], true);
    assert_eq!(body["accounts_credited"], 0);
    assert!(body["warning"].is_string());
    let (_, st) = call_json(&app, "GET", "/status?token=ab1234", None).await;
    assert_eq!(st["accrued"], 1400);
}

#[tokio::test]
async fn shared_validation_vectors_match_over_http() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/validation_vectors.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let app = router(state_at_week(1));
    provision(&app, "vec0001").await;
    for case in doc["cases"].as_array().unwrap() {
        let name = case["name"].as_str().unwrap();
        let (s, body) = call_json(&app, "POST", "/run?token=vec0001", Some(case["fields"].clone())).await;
        if case["valid"].as_bool().unwrap() {
            assert_eq!(s, StatusCode::OK, "{name}: {body}");
        } else {
            assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{name}");
            let got: Vec<(Value, Value)> = body["errors"].as_array().unwrap().iter().map(|e| (e["field"].clone(), e["code"].clone())).collect();
            let want: Vec<(Value, Value)> = case["errors"].as_array().unwrap().iter().map(|e| (e["field"].clone(), e["code"].clone())).collect();
            assert_eq!(got, want, "{name}");
        }
    }
}

#[tokio::test]
async fn api_state_equals_direct_engine_state() {
    let state = state_at_week(1);
    let app = router(state.clone());
    let mut direct = Game::new(GameConfig::with_seed(99));
    direct.advance_week();

    provision(&app, "rbg4036").await;
    direct.provision("rbg4036").unwrap();
    provision(&app, "ab1234").await;
    direct.provision("ab1234").unwrap();
    let rbg = Token::parse("rbg4036").unwrap();
    let ab = Token::parse("ab1234").unwrap();
    let p = InputPoint::from_array([8.0, 5.0, 6.0, 2.0, 4.0, 10.0, 3.0]);
    for (tok, t, reps) in [("rbg4036", &rbg, 4), ("ab1234", &ab, 10), ("rbg4036", &rbg, 1)] {
        call(&app, "POST", &format!("/run?token={tok}"), Some(run_body(reps))).await;
        direct.execute_run(t, &p, reps).unwrap();
    }
    call(&app, "POST", &format!("/admin/advance?token={ADMIN}"), None).await;
    direct.advance_week();
    call(&app, "POST", "/run?token=ab1234", Some(run_body(2))).await;
    direct.execute_run(&ab, &p, 2).unwrap();
    assert!(state.read(|g| *g == direct));
}

#[tokio::test]
async fn mutations_are_persisted_before_they_are_acknowledged() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(JsonFileStore::new(dir.path().join("game.json")));
    let mut game = Game::new(GameConfig::with_seed(5));
    game.advance_week();
    let state = AppState::new(game, Some(store.clone()), ADMIN);
    let app = router(state.clone());
    provision(&app, "rbg4036").await;
    call(&app, "POST", "/run?token=rbg4036", Some(run_body(3))).await;
    let loaded = store.load().unwrap().game;
    assert!(state.read(|g| *g == loaded));
}

struct BrokenStore;

impl SnapshotStore for BrokenStore {
    fn save(&self, _: &GameSnapshot) -> Result<bool, StoreError> {
        Err(StoreError::Io {
            path: "/dev/full".into(),
            source: std::io::Error::other("disk full"),
        })
    }
    fn load(&self) -> Result<GameSnapshot, StoreError> {
        unreachable!()
    }
}

#[tokio::test]
async fn failed_save_discards_the_change() {
    let mut game = Game::new(GameConfig::with_seed(5));
    game.advance_week();
    game.provision("rbg4036").unwrap();
    let before = game.clone();
    let state = AppState::new(game, Some(Arc::new(BrokenStore)), ADMIN);
    let app = router(state.clone());
    let (s, body) = call_json(&app, "POST", "/run?token=rbg4036", Some(run_body(3))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["error"], "storage");
    assert!(state.read(|g| *g == before));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_runs_from_one_token_keep_the_ledger_exact() {
    let state = state_at_week(1);
    let app = router(state.clone());
    provision(&app, "rbg4036").await;
    let mut handles = Vec::new();
    for i in 0..40 {
        let app = app.clone();
        handles.push(tokio::spawn(async move { call(&app, "POST", "/run?token=rbg4036", Some(run_body(1 + i % 10))).await.0 }));
    }
    let mut ok = 0;
    for h in handles {
        match h.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::FORBIDDEN => {}
            other => panic!("unexpected {other}"),
        }
    }
    let token = Token::parse("rbg4036").unwrap();
    state.read(|g| {
        let a = g.account(&token).unwrap();
        assert_eq!(a.paid_runs().count(), ok);
        let charged: i64 = a.paid_runs().map(|r| r.cost).sum();
        assert_eq!(a.spent(), charged);
        assert_eq!(a.balance(), a.accrued() - charged);
        // The last admitted run started from a positive balance.
        assert!(a.balance() + a.paid_runs().last().unwrap().cost > 0);
    });
}
