//! Declarative experiment runner: config parsing, fixture management,
//! protocol/analysis dispatch and deterministic result serialization.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub use commands::{dispatch, Cli};
pub use config::ExperimentConfig;
pub use manifest::RunManifest;

/// Process exit codes: 0 ok, 2 usage/unknown name, 3 config invariant,
/// 4 numerical non-convergence.
pub fn exit_code_for(err: &crate::Error) -> i32 {
    match err {
        crate::Error::Unknown(_) => 2,
        crate::Error::NonConvergence(_) => 4,
        _ => 3,
    }
}
