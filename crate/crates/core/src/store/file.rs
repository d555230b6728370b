use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::Mutex;

use super::{GameSnapshot, SnapshotStore, StoreError, FORMAT_VERSION};
use crate::engine::{Game, PlayerAccount};

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `contents` next to `path` and renames it into place.
fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(
        ".{name}.tmp.{}.{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)?;
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
        Ok(())
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        StoreError::io(path, e)
    })
}

fn read(path: &Path) -> Result<String, StoreError> {
    fs::read_to_string(path).map_err(|e| StoreError::io(path, e))
}

/// Last committed revision, guarded by the commit lock.
#[derive(Default)]
struct CommitLock(Mutex<Option<u64>>);

impl CommitLock {
    fn commit(&self, revision: u64, write: impl FnOnce() -> Result<(), StoreError>) -> Result<bool, StoreError> {
        let mut last = self.0.lock();
        if last.is_some_and(|r| revision < r) {
            return Ok(false);
        }
        write()?;
        *last = Some(revision);
        Ok(true)
    }
}

pub struct JsonFileStore {
    path: PathBuf,
    lock: CommitLock,
}

impl JsonFileStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            lock: CommitLock::default(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn exists(&self) -> bool {
        self.path.exists()
    }
}

impl SnapshotStore for JsonFileStore {
    fn save(&self, snapshot: &GameSnapshot) -> Result<bool, StoreError> {
        self.lock.commit(snapshot.game.revision, || {
            atomic_write(&self.path, snapshot.to_json().as_bytes())
        })
    }

    fn load(&self) -> Result<GameSnapshot, StoreError> {
        GameSnapshot::from_json(&read(&self.path)?, &self.path)
    }
}

/// Directory layout:
///
/// ```text
/// <root>/CURRENT                   name of the live generation
/// <root>/gen-000007/game.json      snapshot with an empty account map
/// <root>/gen-000007/players/<token>.json
/// ```
pub struct PlayerDirStore {
    root: PathBuf,
    lock: CommitLock,
    generation: AtomicU64,
}

impl PlayerDirStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        let root = root.into();
        let generation = fs::read_to_string(root.join("CURRENT"))
            .ok()
            .and_then(|s| s.trim().strip_prefix("gen-").and_then(|n| n.parse().ok()))
            .unwrap_or(0);
        Self {
            root,
            lock: CommitLock::default(),
            generation: AtomicU64::new(generation),
        }
    }

    fn write_generation(&self, snapshot: &GameSnapshot) -> Result<(), StoreError> {
        let next = self.generation.load(Ordering::SeqCst) + 1;
        let name = format!("gen-{next:06}");
        let gen_dir = self.root.join(&name);
        let players = gen_dir.join("players");
        fs::create_dir_all(&players).map_err(|e| StoreError::io(&players, e))?;

        let mut header = snapshot.clone();
        let accounts = std::mem::take(&mut header.game.accounts);
        atomic_write(&gen_dir.join("game.json"), header.to_json().as_bytes())?;
        for (token, account) in &accounts {
            let mut text = serde_json::to_string_pretty(account).expect("account serializes");
            text.push('\n');
            atomic_write(&players.join(format!("{}.json", token.as_str())), text.as_bytes())?;
        }
        atomic_write(&self.root.join("CURRENT"), format!("{name}\n").as_bytes())?;
        let previous = self.generation.swap(next, Ordering::SeqCst);
        if previous > 0 {
            let _ = fs::remove_dir_all(self.root.join(format!("gen-{previous:06}")));
        }
        Ok(())
    }
}

impl SnapshotStore for PlayerDirStore {
    fn save(&self, snapshot: &GameSnapshot) -> Result<bool, StoreError> {
        self.lock.commit(snapshot.game.revision, || self.write_generation(snapshot))
    }

    fn load(&self) -> Result<GameSnapshot, StoreError> {
        let current = self.root.join("CURRENT");
        let name = read(&current)?;
        let gen_dir = self.root.join(name.trim());
        let header_path = gen_dir.join("game.json");
        let mut snapshot = GameSnapshot::from_json(&read(&header_path)?, &header_path)?;
        let players = gen_dir.join("players");
        let mut paths: Vec<PathBuf> = fs::read_dir(&players)
            .map_err(|e| StoreError::io(&players, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let game: &mut Game = &mut snapshot.game;
        for path in paths {
            let account: PlayerAccount = serde_json::from_str(&read(&path)?)
                .map_err(|source| StoreError::Corrupt { path: path.clone(), source })?;
            game.accounts.insert(account.token.clone(), account);
        }
        debug_assert_eq!(snapshot.format_version, FORMAT_VERSION);
        Ok(snapshot)
    }
}
