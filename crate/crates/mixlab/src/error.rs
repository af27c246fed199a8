//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed state: {0}")]
    MalformedState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("row {row} is not stochastic: sums to {sum}")]
    NotStochastic { row: usize, sum: String },

    #[error("negative entry at ({row}, {col}): {value}")]
    NegativeEntry {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("chain is not irreducible on the active set: no path from state {from} to state {to}")]
    NotIrreducible { from: usize, to: usize },

    #[error("chain is periodic on the active set: period {period} witnessed at state {state}")]
    Periodic { period: usize, state: usize },

    #[error("active set is not closed: state {from} has weight {weight} on excluded state {to}")]
    ExcludedReachable {
        from: usize,
        to: usize,
        weight: String,
    },

    #[error(
        "detailed balance violated between states {x} and {y}: \
         pi(x)m(x,y) = {lhs} but pi(y)m(y,x) = {rhs}"
    )]
    DetailedBalance {
        x: usize,
        y: usize,
        lhs: String,
        rhs: String,
    },

    #[error(
        "matrix is not lumpable under the given orbit map: representatives {rep_a} and {rep_b} \
         of orbit {orbit} have different total weight on orbit {target} ({weight_a} vs {weight_b})"
    )]
    NotLumpable {
        orbit: usize,
        rep_a: usize,
        rep_b: usize,
        target: usize,
        weight_a: String,
        weight_b: String,
    },

    #[error("vector is not an eigenfunction: residual {residual} at state {state} (eigenvalue {eigenvalue})")]
    NotEigenfunction {
        state: usize,
        residual: String,
        eigenvalue: String,
    },

    #[error("worst-case TV distance did not drop below {eps} within {steps} steps")]
    NoConvergence { eps: f64, steps: usize },

    #[error("{kind} chain is not materializable at n = {n} (supported range {min}..={max})")]
    SizeLimit {
        kind: String,
        n: usize,
        min: usize,
        max: usize,
    },

    #[error("conditioning event has probability zero ({0})")]
    EmptyConditioningEvent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("exact solve unsupported: {0}")]
    ExactSolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
