//! Finite Markov chain mixing laboratory.
//!
//! The crate builds a family of related finite chains — a pair-resampling
//! chain on length-n strings over {0,1,2,3}, its projections onto support
//! patterns and Hamming weights, swap/transposition chains, and the random
//! transposition walk on the symmetric group — and provides the machinery to
//! analyze them: exact rational stochastic matrices, stationary states,
//! symmetry (orbit) projections, reversible spectra, total-variation mixing
//! times, Monte Carlo trajectory sampling, and a set of quantitative
//! convergence checks tying everything together.
//!
//! Construction and algebraic identities use exact rational arithmetic;
//! eigensolves and long propagation use doubles. See the module docs for the
//! split.

pub mod analysis;
pub mod chains;
pub mod counterexample;
pub mod error;
pub mod matrix;
pub mod mixing;
pub mod montecarlo;
pub mod orbits;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use matrix::{Distribution, Rat64, Scalar, SparseMatrix};
pub use state::{HammingWeight, PauliString, Permutation, StateCodec, SupportString};
