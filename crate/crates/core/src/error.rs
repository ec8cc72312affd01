//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/table shapes do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Input outside an operation's domain (zero polynomial, empty data, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact polynomial division left a remainder; carries the first
    /// offending remainder term.
    #[error("inexact division: remainder term {term}")]
    Divisibility { term: String },

    /// Iterative solver exhausted its sweep cap.
    #[error("no convergence after {iters} iterations (worst residual {residual:.3e})")]
    Convergence { iters: usize, residual: f64 },

    /// The eliminated system was identically zero (shared component).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A positive-definiteness certificate failed.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A point claimed to be on a model is off it beyond tolerance.
    #[error("off model: constraint residual {residual:.3e}")]
    OffModel { residual: f64 },

    /// Malformed textual input (polynomials, rationals, statements, JSON).
    #[error("parse error: {0}")]
    Parse(String),
}
