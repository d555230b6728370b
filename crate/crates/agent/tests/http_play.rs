use std::process::Command;

use yieldgame_agent::client::HttpClient;
use yieldgame_agent::{build, play_season, Event, GameClient, Seat, StrategyConfig, StrategyKind, WeekClock};
use yieldgame_core::store::parse_export;
use yieldgame_core::{Game, GameConfig};
use yieldgame_server::AppState;

const ADMIN: &str = "operator-secret";

/// Starts a server on an ephemeral port; the runtime lives as long as the
/// returned guard.
fn spawn_server(seed: u64) -> (String, tokio::runtime::Runtime) {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    let state = AppState::new(Game::new(GameConfig::with_seed(seed)), None, ADMIN);
    rt.spawn(async move { run_server(listener, state).await });
    (format!("http://{addr}"), rt)
}

async fn run_server(listener: tokio::net::TcpListener, state: AppState) {
    yieldgame_server::serve(listener, state).await.unwrap();
}

#[test]
fn replicator_plays_a_season_over_http() {
    let (url, _rt) = spawn_server(21);
    let admin = HttpClient::new(&url, ADMIN);
    admin.provision("HT0001").unwrap();
    let cfg = StrategyConfig::new(StrategyKind::Replicator, 21);
    let mut seat = Seat::new(build(&cfg).unwrap(), HttpClient::new(&url, "HT0001"), cfg.spend);
    let mut clock = HttpClient::new(&url, ADMIN);
    let t = play_season(&mut seat, &mut clock).unwrap();
    assert_eq!(t.count(Event::Rejected), 0);
    assert!(t.max_week() <= 13);

    let status = seat.client.status().unwrap();
    assert_eq!(status.current_week, 13);
    assert!(!status.can_run);
    assert_eq!(t.total_cost(), status.spent);
    let rows = parse_export(&seat.client.download().unwrap()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.week > 0).count(), t.runs().count());

    // The clock is already at the end.
    let out = clock.advance().unwrap();
    assert!(out.clamped);
    let board = admin.leaderboard("by_week").unwrap();
    assert_eq!(board.series.len(), 1);
    assert!(board.series[0].points.len() <= 13);
}

#[test]
fn player_credentials_cannot_drive_the_clock() {
    let (url, _rt) = spawn_server(22);
    HttpClient::new(&url, ADMIN).provision("PL0001").unwrap();
    let err = HttpClient::new(&url, "PL0001").advance().unwrap_err();
    assert!(err.to_string().contains("forbidden"), "{err}");
}

#[test]
fn cli_plays_a_local_league_from_a_run_file() {
    let dir = tempfile::tempdir().unwrap();
    let run_file = dir.path().join("league.toml");
    std::fs::write(
        &run_file,
        r#"
out_dir = "results"

[game]
seed = 17

[[players]]
token = "RS0001"
strategy = "classical"

[[players]]
token = "RP0002"
strategy = "replicator"
"#,
    )
    .unwrap();
    let state = dir.path().join("game.json");
    let out = dir.path().join("results");
    let bin = env!("CARGO_BIN_EXE_yieldgame");
    let status = Command::new(bin)
        .args(["--config", run_file.to_str().unwrap(), "play", "--state", state.to_str().unwrap(), "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for name in [
        "transcript.csv",
        "leaderboard_by_week_denoised.csv",
        "leaderboard_by_run_denoised.csv",
        "leaderboard_by_week_raw.csv",
        "leaderboard_by_run_raw.csv",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }

    let export = Command::new(bin)
        .args(["export", "RP0002", "--state", state.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(export.status.success());
    let rows = parse_export(&String::from_utf8(export.stdout).unwrap()).unwrap();
    assert!(rows.iter().filter(|r| r.week > 0).all(|r| r.yields.len() == 10));

    // The saved game is at its final week; another advance is a no-op.
    let adv = Command::new(bin)
        .args(["advance", "--state", state.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(adv.status.success());
    let text = String::from_utf8(adv.stdout).unwrap();
    assert!(text.contains("\"clamped\": true"), "{text}");
}

#[test]
fn cli_rejects_a_bad_token() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("game.json");
    let out = Command::new(env!("CARGO_BIN_EXE_yieldgame"))
        .args(["provision", "not-a-token", "--state", state.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
