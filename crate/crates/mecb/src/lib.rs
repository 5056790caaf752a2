//! Entropy-constrained information coupling toolkit.
//!
//! The crate solves three related problems over finite alphabets:
//!
//! - **EBIM** (entropy-bounded information maximization): find a joint
//!   distribution `p_XT` maximizing `I(X;T)` subject to a fixed input
//!   marginal `p_X` and a code-entropy budget `H(T) <= R` ([`ebim`]).
//! - **MEC** (minimum entropy coupling): couple two given marginals so the
//!   joint entropy is as small as possible ([`mec`]).
//! - **MEC-B**: the two-stage composition of both — an EBIM encoder feeding
//!   a MEC decoder through a rate-limited code ([`pipeline`]).
//!
//! On top of the solvers, [`mdp`] provides a noisy grid world with
//! maximum-entropy policy learning, and [`mcg`] runs rate-limited Markov
//! coding games in which a source steganographically signals a message to a
//! receiver through an agent's actions.
//!
//! Start with the runnable examples (`cargo run --example ebim_frontier`,
//! `mcg_tradeoff`, ...) or the `mecbkit` binary for the command line.

// `!(x > 0.0)` style guards are deliberate: they reject NaN inputs, which the
// non-negated comparisons would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use thiserror::Error;

pub mod cli;
pub mod ebim;
pub mod mcg;
pub mod mdp;
pub mod mec;
pub mod pipeline;
pub mod probdist;

pub use probdist::{binary_entropy, merge_entropy_drop, Bits, Coupling, Distribution};

/// Error type shared by all solvers and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cannot condition on zero-mass column {0}")]
    ZeroMassColumn(usize),

    #[error("perturbation mass {eps} is not below the selected cell mass {cell}")]
    PerturbationTooLarge { eps: f64, cell: f64 },

    #[error("coupling has a single code column; no entropy-decreasing move exists")]
    SingleColumn,

    #[error("alphabet size {size} exceeds the enumeration limit {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },

    #[error("marginal mismatch while composing couplings: {0}")]
    Composition(String),

    #[error("value iteration did not converge within {0} sweeps")]
    Convergence(usize),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("party beliefs diverged by {0} during an episode")]
    Desync(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Formats a float with 12 significant digits, the fixed file-output format.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}
