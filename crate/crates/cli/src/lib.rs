//! Library side of the `ehfade` command line: configuration, the
//! subcommands and the verification suite. `main.rs` only parses flags.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use commands::{Outcome, OutputOptions};
pub use config::Config;
pub use error::{CliError, CliResult};
