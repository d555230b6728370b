use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use parking_lot::Mutex;
use tracing::info;
use yieldgame_agent::client::HttpClient;
use yieldgame_agent::config::PlayerEntry;
use yieldgame_agent::plots::{emit_leaderboard, emit_with};
use yieldgame_agent::{
    build, play_season, play_week, LocalLeague, ReplicatePolicy, RunConfig, Seat, SpendPolicy, StrategyConfig,
    StrategyKind, Transcript, WeekClock,
};
use yieldgame_core::leaderboard::View;
use yieldgame_core::store::{export_player_file, GameSnapshot, JsonFileStore, SnapshotStore, StoreError};
use yieldgame_core::{Game, Token};
use yieldgame_server::api::LeaderboardResponse;
use yieldgame_server::AppState;

#[derive(Parser)]
#[command(name = "yieldgame", version, about = "Run, play and inspect the yield optimization game")]
struct Cli {
    /// TOML run file; flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Target {
    /// Base URL of a running server.
    #[arg(long)]
    server: Option<String>,
    /// Snapshot file of a local game.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Operator secret for admin requests.
    #[arg(long, env = "YIELDGAME_ADMIN_TOKEN")]
    admin_token: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API over a snapshot file.
    Serve {
        #[command(flatten)]
        target: Target,
        /// Address to listen on, e.g. 127.0.0.1:8080.
        #[arg(long)]
        listen: Option<String>,
        /// Game seed when the snapshot does not exist yet.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Create a player account.
    Provision {
        /// Initials plus PIN, e.g. AB1234.
        token: String,
        #[command(flatten)]
        target: Target,
    },
    /// Move the game clock one week forward.
    Advance {
        #[command(flatten)]
        target: Target,
    },
    /// Play a strategy. Without --server, plays every player of the run
    /// file (or the one given by flags) through a full local season.
    Play {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        token: Option<String>,
        #[arg(long)]
        strategy: Option<StrategyKind>,
        /// spend-all or reserve-K.
        #[arg(long)]
        spend: Option<SpendPolicy>,
        /// fixed-R or adaptive.
        #[arg(long)]
        replicates: Option<ReplicatePolicy>,
        #[arg(long)]
        seed: Option<u64>,
        /// Against a server: keep advancing the clock to the end of the
        /// season (needs the admin token). Otherwise only the current week
        /// is played.
        #[arg(long)]
        season: bool,
        /// Directory for transcripts and leaderboard files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the four leaderboard views as CSV files.
    Leaderboard {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print or save a player's history file.
    Export {
        token: String,
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            RunConfig::from_toml(&text).with_context(|| format!("parsing {}", p.display()))
        }
        None => Ok(RunConfig::default()),
    }
}

/// Flags win over the run file.
fn resolve(target: &Target, cfg: &RunConfig) -> Target {
    Target {
        server: target.server.clone().or_else(|| cfg.server.clone()),
        state: target.state.clone().or_else(|| cfg.state.clone()),
        admin_token: target.admin_token.clone().or_else(|| cfg.admin_token.clone()),
    }
}

fn admin(target: &Target) -> Result<String> {
    target
        .admin_token
        .clone()
        .context("admin token required (--admin-token or YIELDGAME_ADMIN_TOKEN)")
}

fn state_path(target: &Target) -> Result<&Path> {
    target.state.as_deref().context("need --server or --state")
}

/// Loads the snapshot, or starts a new game if the file does not exist.
fn open_game(path: &Path, cfg: &RunConfig) -> Result<(Game, JsonFileStore)> {
    let store = JsonFileStore::new(path);
    let game = match store.load() {
        Ok(snap) => snap.game,
        Err(StoreError::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => {
            info!(path = %path.display(), seed = cfg.game.seed, "starting a new game");
            Game::new(cfg.game.clone())
        }
        Err(e) => return Err(e).context("loading game state"),
    };
    Ok((game, store))
}

fn save_game(store: &JsonFileStore, game: &Game) -> Result<()> {
    store.save(&GameSnapshot::of(game)).context("saving game state")?;
    Ok(())
}

fn strategy_config(
    cfg: &RunConfig,
    token: Option<&str>,
    strategy: Option<StrategyKind>,
    spend: Option<SpendPolicy>,
    replicates: Option<ReplicatePolicy>,
    seed: Option<u64>,
) -> Result<Vec<PlayerEntry>> {
    let mut players = cfg.players.clone();
    if let Some(token) = token {
        let base = players.iter().find(|p| p.token == token).cloned();
        let strategy = strategy
            .or(base.as_ref().map(|b| b.strategy))
            .context("--strategy is required for a player not in the run file")?;
        let mut entry = base.unwrap_or(PlayerEntry {
            token: token.to_string(),
            strategy,
            spend: None,
            replicates: None,
            bounds: None,
            seed: None,
        });
        entry.strategy = strategy;
        entry.spend = spend.or(entry.spend);
        entry.replicates = replicates.or(entry.replicates);
        entry.seed = seed.or(entry.seed);
        players = vec![entry];
    } else if strategy.is_some() {
        bail!("--strategy needs --token");
    }
    if players.is_empty() {
        bail!("no players: pass --token and --strategy, or list [[players]] in the run file");
    }
    Ok(players)
}

fn write_transcript(out: &Path, name: &str, t: &Transcript) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    t.save(&path).with_context(|| format!("writing {}", path.display()))?;
    info!(path = %path.display(), rows = t.rows.len(), "transcript written");
    Ok(())
}

fn fetch_leaderboard(url: &str, view: View) -> Result<Vec<yieldgame_core::leaderboard::LeaderboardSeries>> {
    let res: LeaderboardResponse = HttpClient::new(url, "")
        .leaderboard(&view.to_string())
        .map_err(anyhow::Error::from)?;
    Ok(res.series)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Serve { target, listen, seed } => {
            let target = resolve(&target, &cfg);
            let mut cfg = cfg;
            if let Some(s) = seed {
                cfg.game.seed = s;
            }
            let (game, store) = open_game(state_path(&target)?, &cfg)?;
            save_game(&store, &game)?;
            let state = AppState::new(game, Some(Arc::new(store)), admin(&target)?);
            let listen = listen.unwrap_or(cfg.listen.clone());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&listen).await?;
                info!(addr = %listener.local_addr()?, "serving");
                yieldgame_server::serve(listener, state).await
            })?;
        }
        Command::Provision { token, target } => {
            let target = resolve(&target, &cfg);
            if let Some(url) = &target.server {
                let status = HttpClient::new(url, &admin(&target)?).provision(&token)?;
                println!("{}", serde_json::to_string_pretty(&status)?);
            } else {
                let (mut game, store) = open_game(state_path(&target)?, &cfg)?;
                game.provision(&token)?;
                save_game(&store, &game)?;
                println!("provisioned {}", Token::parse(&token)?.initials());
            }
        }
        Command::Advance { target } => {
            let target = resolve(&target, &cfg);
            if let Some(url) = &target.server {
                let out = HttpClient::new(url, &admin(&target)?).advance()?;
                println!("{}", serde_json::to_string_pretty(&out)?);
            } else {
                let (mut game, store) = open_game(state_path(&target)?, &cfg)?;
                let out = game.advance_week();
                save_game(&store, &game)?;
                println!("{}", serde_json::to_string_pretty(&out)?);
            }
        }
        Command::Play {
            target,
            token,
            strategy,
            spend,
            replicates,
            seed,
            season,
            out,
        } => {
            let target = resolve(&target, &cfg);
            let out = out.unwrap_or(cfg.out_dir.clone());
            let players = strategy_config(&cfg, token.as_deref(), strategy, spend, replicates, seed)?;
            if let Some(url) = &target.server {
                let [entry] = players.as_slice() else {
                    bail!("against a server, play one player at a time (--token)");
                };
                let sc: StrategyConfig = entry.strategy_config(cfg.game.seed);
                let mut seat = Seat::new(build(&sc)?, HttpClient::new(url, &entry.token), sc.spend);
                let transcript = if season {
                    let mut clock = HttpClient::new(url, &admin(&target)?);
                    play_season(&mut seat, &mut clock)?
                } else {
                    let mut t = Transcript::default();
                    play_week(&mut seat, &mut t)?;
                    t
                };
                let initials = Token::parse(&entry.token)?.initials().to_string();
                write_transcript(&out, &format!("transcript_{initials}.csv"), &transcript)?;
            } else {
                let mut league = LocalLeague::new(cfg.game.clone());
                let store = match &target.state {
                    Some(p) => {
                        let (game, store) = open_game(p, &cfg)?;
                        league.game = Arc::new(Mutex::new(game));
                        Some(store)
                    }
                    None => None,
                };
                for p in &players {
                    league.join(&p.token, &p.strategy_config(cfg.game.seed))?;
                }
                let transcript = league.play()?;
                write_transcript(&out, "transcript.csv", &transcript)?;
                let game = league.game.lock();
                emit_leaderboard(&game, &out)?;
                if let Some(store) = store {
                    save_game(&store, &game)?;
                }
                for a in game.accounts.values() {
                    let best = a.runs.iter().map(|r| r.mean_yield()).fold(f64::NEG_INFINITY, f64::max);
                    println!("{}: {} runs, spent {}, best run mean {best:.4}", a.token.initials(), a.paid_runs().count(), a.spent());
                }
            }
        }
        Command::Leaderboard { target, out } => {
            let target = resolve(&target, &cfg);
            let out = out.unwrap_or(cfg.out_dir.clone());
            let paths = if let Some(url) = &target.server {
                emit_with(&out, |view| fetch_leaderboard(url, view))?
            } else {
                let (game, _) = open_game(state_path(&target)?, &cfg)?;
                emit_leaderboard(&game, &out)?
            };
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Export { token, target, out } => {
            let target = resolve(&target, &cfg);
            let text = if let Some(url) = &target.server {
                use yieldgame_agent::GameClient;
                HttpClient::new(url, &token).download()?
            } else {
                let (game, _) = open_game(state_path(&target)?, &cfg)?;
                export_player_file(game.lookup(&token)?)
            };
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    run(Cli::parse())
}
