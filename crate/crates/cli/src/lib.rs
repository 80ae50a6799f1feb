//! Driver crate: SMT session over a child-process pipe, run configuration,
//! on-disk formats, and the `sepe` command implementations.

pub mod commands;
pub mod config;
pub mod encode;
pub mod formats;
pub mod locate;
pub mod session;

pub use config::RunConfig;
pub use session::{SessionConfig, SmtSession};
