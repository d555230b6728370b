//! Persistence of whole games and the per-player export file.
//!
//! A snapshot is one JSON document (`format_version` + the full [`Game`]).
//! Two layouts sit behind [`SnapshotStore`]:
//!
//! * [`JsonFileStore`]: the whole snapshot in a single file.
//! * [`PlayerDirStore`]: one file per player plus a game header, written as
//!   a numbered generation directory and published by atomically replacing
//!   a `CURRENT` pointer file.
//!
//! Both commit with write-temp-then-rename, so a reader only ever sees a
//! complete snapshot.

mod export;
mod file;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Game;

pub use export::{export_player_file, parse_export, spend_from_export, ExportError, ExportRow, EXPORT_HEADER};
pub use file::{JsonFileStore, PlayerDirStore};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: corrupt snapshot: {source}")]
    Corrupt {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported snapshot format version {found}")]
    UnsupportedVersion { path: PathBuf, found: u32 },
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSnapshot {
    pub format_version: u32,
    pub game: Game,
}

impl GameSnapshot {
    pub fn of(game: &Game) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            game: game.clone(),
        }
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("snapshot serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, StoreError> {
        let snap: Self = serde_json::from_str(text).map_err(|source| StoreError::Corrupt {
            path: path.to_path_buf(),
            source,
        })?;
        if snap.format_version != FORMAT_VERSION {
            return Err(StoreError::UnsupportedVersion {
                path: path.to_path_buf(),
                found: snap.format_version,
            });
        }
        Ok(snap)
    }
}

/// Durable home of a game.
pub trait SnapshotStore: Send + Sync {
    /// Commits `snapshot`. Saves are serialized; a snapshot whose revision
    /// is older than the last committed one is dropped and `Ok(false)` is
    /// returned.
    fn save(&self, snapshot: &GameSnapshot) -> Result<bool, StoreError>;

    fn load(&self) -> Result<GameSnapshot, StoreError>;
}
