//! Drives strategies through weeks of play.

use thiserror::Error;
use tracing::{debug, info, warn};
use yieldgame_core::replicate_cost;
use yieldgame_core::store::{parse_export, ExportRow};
use yieldgame_server::api::Status;

use crate::client::{ClientError, GameClient, WeekClock};
use crate::config::SpendPolicy;
use crate::strategy::Strategy;
use crate::transcript::{Event, Transcript, TranscriptRow};

/// Hard cap on runs in one week, far above anything the budget allows.
pub const MAX_RUNS_PER_WEEK: usize = 200;

#[derive(Debug, Error)]
pub enum SeasonError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("export file: {0}")]
    Export(String),
    #[error("the clock did not move past week {0}")]
    StuckClock(u32),
}

/// One player in a season: strategy, client and the spend policy.
pub struct Seat<C> {
    pub strategy: Box<dyn Strategy + Send>,
    pub client: C,
    pub spend: SpendPolicy,
}

impl<C: GameClient> Seat<C> {
    pub fn new(strategy: Box<dyn Strategy + Send>, client: C, spend: SpendPolicy) -> Self {
        Self { strategy, client, spend }
    }
}

fn history(client: &mut impl GameClient) -> Result<Vec<ExportRow>, SeasonError> {
    let text = client.download()?;
    let mut rows = parse_export(&text).map_err(|e| SeasonError::Export(e.to_string()))?;
    // The file lists newest first.
    rows.reverse();
    Ok(rows)
}

/// Plays the current week until the game, the spend policy or the
/// strategy stops it. Server rejections and strategy failures are
/// recorded and end the week; only transport-level trouble is an error.
pub fn play_week<C: GameClient>(seat: &mut Seat<C>, transcript: &mut Transcript) -> Result<Status, SeasonError> {
    let mut status = seat.client.status()?;
    let week = status.current_week;
    let name = seat.strategy.kind().as_str();
    let player = status.player.clone();
    let row = |event| TranscriptRow::new(week, event, name, &player);

    let mut start = row(Event::WeekStart).note(format!("spent {} accrued {}", status.spent, status.accrued));
    start.balance_after = Some(status.balance);
    transcript.push(start);

    let rows = history(&mut seat.client)?;
    if let Err(e) = seat.strategy.begin_week(week, status.total_weeks, &rows) {
        warn!(%player, week, "strategy failed at week start: {e}");
        transcript.push(row(Event::Error).note(e.to_string()));
        return Ok(status);
    }
    let final_week = week >= status.total_weeks;

    for _ in 0..MAX_RUNS_PER_WEEK {
        if !status.can_run {
            break;
        }
        let plan = match seat.strategy.next_run(&status) {
            Ok(Some(p)) => p,
            Ok(None) => break,
            Err(e) => {
                transcript.push(row(Event::Error).note(e.to_string()));
                break;
            }
        };
        let mut suggested = row(Event::Suggestion).with_point(&plan.point).note(plan.note.clone());
        suggested.reps = Some(plan.reps);
        suggested.acquisition = plan.acquisition;
        transcript.push(suggested);

        let cost = replicate_cost(plan.reps).unwrap_or(i64::MAX);
        if !seat.spend.allows(status.balance, cost, final_week) {
            let mut held = row(Event::Held).note(format!("{} keeps the balance above the reserve", seat.spend));
            held.balance_after = Some(status.balance);
            transcript.push(held);
            break;
        }
        match seat.client.submit(&plan.point, plan.reps) {
            Ok(res) => {
                debug!(%player, week, run = res.run.run_id, "run accepted");
                let mean = res.run.yields.iter().sum::<f64>() / res.run.yields.len() as f64;
                let mut r = row(Event::Run).with_point(&res.run.point).note(plan.note);
                r.reps = Some(res.run.reps);
                r.cost = Some(res.run.cost);
                r.balance_after = Some(res.status.balance);
                r.mean_yield = Some(mean);
                r.acquisition = plan.acquisition;
                transcript.push(r);
                seat.strategy.observe(&res.run);
                status = res.status;
            }
            Err(ClientError::Rejected { kind, message }) => {
                warn!(%player, week, "run rejected: {kind}");
                let mut r = row(Event::Rejected).with_point(&plan.point).note(format!("{kind}: {message}"));
                r.reps = Some(plan.reps);
                r.balance_after = Some(status.balance);
                transcript.push(r);
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut end = row(Event::WeekEnd);
    end.balance_after = Some(status.balance);
    transcript.push(end);
    Ok(status)
}

/// Plays every open week and advances the clock after each, until the last
/// week has been played.
pub fn play_season<C: GameClient, K: WeekClock>(seat: &mut Seat<C>, clock: &mut K) -> Result<Transcript, SeasonError> {
    let mut seats = [seat];
    league(&mut seats, clock)
}

/// Several players sharing one clock: each week every seat plays in turn,
/// then the clock moves.
pub fn league<C: GameClient, K: WeekClock>(seats: &mut [&mut Seat<C>], clock: &mut K) -> Result<Transcript, SeasonError> {
    let mut transcript = Transcript::default();
    let Some(first) = seats.first_mut() else {
        return Ok(transcript);
    };
    let mut status = first.client.status()?;
    if status.current_week == 0 {
        clock.advance()?;
        status = first.client.status()?;
    }
    loop {
        let week = status.current_week;
        info!(week, "playing week");
        for seat in seats.iter_mut() {
            play_week(seat, &mut transcript)?;
        }
        if week >= status.total_weeks {
            return Ok(transcript);
        }
        let next = clock.advance()?;
        if next.week <= week {
            return Err(SeasonError::StuckClock(week));
        }
        status = seats[0].client.status()?;
    }
}
