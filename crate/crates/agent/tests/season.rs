use std::collections::HashSet;

use yieldgame_agent::plots::{emit_leaderboard, file_name, read_series};
use yieldgame_agent::{Event, LocalLeague, SpendPolicy, StrategyConfig, StrategyKind, Transcript};
use yieldgame_core::leaderboard::{Axis, Scale, View};
use yieldgame_core::GameConfig;

fn season(seed: u64, players: &[(&str, StrategyConfig)]) -> (LocalLeague, Transcript) {
    let mut league = LocalLeague::new(GameConfig::with_seed(seed));
    for (token, cfg) in players {
        league.join(token, cfg).unwrap();
    }
    let t = league.play().unwrap();
    (league, t)
}

fn assert_clean(t: &Transcript) {
    assert_eq!(t.count(Event::Rejected), 0, "a strategy submitted a gated run");
    assert_eq!(t.count(Event::Error), 0);
    assert!(t.max_week() <= 13);
}

#[test]
fn replicator_stays_within_fifty_runs() {
    let (league, t) = season(3, &[("RP0001", StrategyConfig::new(StrategyKind::Replicator, 3))]);
    assert_clean(&t);
    let game = league.game.lock();
    let acc = game.accounts.values().next().unwrap();
    let runs: Vec<_> = acc.paid_runs().collect();
    assert!(runs.len() <= 50, "{} runs", runs.len());
    assert!(runs.len() >= 45);
    assert!(runs.iter().all(|r| r.reps == 10 && r.cost == 28));
    let unique: HashSet<_> = runs.iter().map(|r| r.point.to_array().map(f64::to_bits)).collect();
    assert!(unique.len() <= 50);
    assert_eq!(t.total_cost(), acc.spent());
    assert_eq!(acc.accrued(), 1400);
}

#[test]
fn classical_season_spends_everything_it_is_given() {
    let (league, t) = season(5, &[("RS0001", StrategyConfig::new(StrategyKind::Classical, 5))]);
    assert_clean(&t);
    let game = league.game.lock();
    let acc = game.accounts.values().next().unwrap();
    assert_eq!(t.total_cost(), acc.spent());
    assert!(acc.balance() <= 0, "left {} unspent", acc.balance());
    assert!(t.runs().any(|r| r.note.starts_with("ascent")));
    // Every week from 1 to 13 was played.
    let weeks: HashSet<u32> = t.rows.iter().filter(|r| r.event == Event::WeekStart).map(|r| r.week).collect();
    assert_eq!(weeks, (1..=13).collect());
}

#[test]
fn seasons_replay_exactly() {
    let players = [
        ("RS0001", StrategyConfig::new(StrategyKind::Classical, 11)),
        ("RP0002", StrategyConfig::new(StrategyKind::Replicator, 12)),
    ];
    let (a, ta) = season(8, &players);
    let (b, tb) = season(8, &players);
    assert_eq!(ta, tb);
    assert_eq!(*a.game.lock(), *b.game.lock());
}

#[test]
fn reserve_policy_keeps_a_cushion_until_the_last_week() {
    let mut cfg = StrategyConfig::new(StrategyKind::Replicator, 4);
    cfg.spend = SpendPolicy::Reserve(50);
    let (league, t) = season(4, &[("RV0001", cfg)]);
    assert_clean(&t);
    assert!(t.count(Event::Held) > 0);
    for r in t.runs().filter(|r| r.week < 13) {
        assert!(r.balance_after.unwrap() >= 50, "week {} left {:?}", r.week, r.balance_after);
    }
    let game = league.game.lock();
    let acc = game.accounts.values().next().unwrap();
    assert!(acc.balance() <= 0);
    assert_eq!(t.total_cost(), acc.spent());
}

#[test]
fn two_player_leaderboard_files() {
    let (league, _) = season(
        2,
        &[
            ("AA0001", StrategyConfig::new(StrategyKind::Classical, 1)),
            ("BB0002", StrategyConfig::new(StrategyKind::Replicator, 2)),
        ],
    );
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_leaderboard(&league.game.lock(), dir.path()).unwrap();
    assert_eq!(paths.len(), 4);
    let mut global = f64::NEG_INFINITY;
    for view in View::ALL {
        let text = std::fs::read_to_string(dir.path().join(file_name(view))).unwrap();
        assert!(text.starts_with("label,x,value\n"));
        let series = read_series(text.as_bytes()).unwrap();
        let labels: Vec<_> = series.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["AA", "BB"], "{view}");
        for s in &series {
            assert!(s.points.windows(2).all(|w| w[1].value >= w[0].value), "{view} {}", s.label);
            if view.axis == Axis::ByWeek {
                assert!(s.points.len() <= 13);
            }
        }
        if view == (View { axis: Axis::ByWeek, scale: Scale::Denoised }) {
            global = series.iter().flat_map(|s| s.points.iter().map(|p| p.value)).fold(global, f64::max);
        }
    }
    assert!((global - 1.0).abs() < 1e-12, "{global}");
}
