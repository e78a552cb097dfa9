//! Numerical laboratory for heralded entanglement between cavity-coupled
//! rare-earth ion qubits: conditional master-equation dynamics, protocol
//! timelines, maximum-likelihood tomography and closed-form rate/coherence
//! models, driven from declarative experiment configs.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod node;
pub mod protocols;
pub mod qcore;
pub mod tomography;
pub mod units;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated at `{field}`: {msg}")]
    Invariant { field: String, msg: String },
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("convergence failure: {0}")]
    NonConvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
