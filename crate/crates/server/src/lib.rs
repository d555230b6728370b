//! HTTP portal for the game.
//!
//! Players authenticate with their token (`?token=` or the `X-Game-Token`
//! header); admin routes take the admin secret the same way. Bodies are
//! JSON, except `/download`, which returns the export CSV verbatim.
//!
//! | route | auth | purpose |
//! |---|---|---|
//! | `GET /status` | player | budget and gate |
//! | `POST /run` | player | submit a run |
//! | `GET /history?page=&page_size=` | player | runs, newest first |
//! | `GET /download` | player | export CSV |
//! | `GET /leaderboard?view=` | none | progress series |
//! | `POST /admin/advance` | admin | next week |
//! | `POST /admin/provision` | admin | new account, body `{"player": token}` |

pub mod api;
mod app;
mod error;

pub use app::{router, serve, AppState};
pub use error::ApiError;
