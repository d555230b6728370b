//! Leaderboard series as long-form CSV files: `label,x,value`.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use yieldgame_core::leaderboard::{leaderboard, LeaderboardSeries, SeriesPoint, View};
use yieldgame_core::Game;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub label: String,
    pub x: u32,
    pub value: f64,
}

pub fn write_series<W: io::Write>(series: &[LeaderboardSeries], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for s in series {
        for p in &s.points {
            out.serialize(SeriesRow {
                label: s.label.clone(),
                x: p.x,
                value: p.value,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Groups rows back into series, keeping first-seen label order.
pub fn read_series<R: io::Read>(r: R) -> Result<Vec<LeaderboardSeries>, csv::Error> {
    let mut series: Vec<LeaderboardSeries> = Vec::new();
    for row in csv::Reader::from_reader(r).deserialize::<SeriesRow>() {
        let row = row?;
        let point = SeriesPoint { x: row.x, value: row.value };
        match series.iter_mut().find(|s| s.label == row.label) {
            Some(s) => s.points.push(point),
            None => series.push(LeaderboardSeries {
                label: row.label,
                points: vec![point],
            }),
        }
    }
    Ok(series)
}

pub fn file_name(view: View) -> String {
    format!("leaderboard_{view}.csv")
}

/// Writes one file per view into `dir`, given a source of series.
pub fn emit_with<E>(
    dir: &Path,
    mut series_for: impl FnMut(View) -> Result<Vec<LeaderboardSeries>, E>,
) -> Result<Vec<PathBuf>, E>
where
    E: From<csv::Error>,
{
    std::fs::create_dir_all(dir).map_err(csv::Error::from)?;
    let mut paths = Vec::new();
    for view in View::ALL {
        let path = dir.join(file_name(view));
        let file = std::fs::File::create(&path).map_err(csv::Error::from)?;
        write_series(&series_for(view)?, file)?;
        paths.push(path);
    }
    Ok(paths)
}

/// All four views of an in-memory game.
pub fn emit_leaderboard(game: &Game, dir: &Path) -> Result<Vec<PathBuf>, csv::Error> {
    emit_with(dir, |view| Ok::<_, csv::Error>(leaderboard(game, view)))
}
