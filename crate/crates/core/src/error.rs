//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value or argument violated a precondition (non-finite coefficient,
    /// `p < 1`, mismatched grids, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Requested synthesis/analysis on a grid too small for the bandwidth.
    #[error("grid of {n_grid} points per axis cannot hold modes up to |n| <= {n_max} (need at least {needed})")]
    GridTooSmall {
        n_grid: usize,
        n_max: u32,
        needed: usize,
    },

    /// Time weight `<t>^-delta` is not integrable at the requested exponent.
    #[error("divergent weight: delta = {delta} must exceed 1/p1 = {inv_p1}")]
    DivergentWeight { delta: f64, inv_p1: f64 },

    /// The Duhamel fixed-point iteration failed to contract.
    #[error("interval too long: {0}")]
    IntervalTooLong(String),

    /// Energy drift exceeded the configured guard.
    #[error("numerical instability: {0}")]
    Instability(String),

    /// Two spectra (or a spectrum and a sign pattern) do not share an index set.
    #[error("index set mismatch: {0}")]
    IndexSetMismatch(String),

    /// A fit was requested on data that cannot support it.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A named functional, law or experiment parameter was not recognised.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
