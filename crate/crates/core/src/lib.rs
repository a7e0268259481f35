//! Error exponents and universal decoding for erasure channels.
//!
//! This crate computes the random-coding error exponents of erasure decoding
//! over discrete memoryless channels, the universally achievable exponent
//! fraction `xi*(R,T)` when the channel is unknown, and provides the matched
//! (optimal) erasure decoder together with its competitive-minimax universal
//! counterpart. Exact enumeration and Monte Carlo simulation at small block
//! lengths verify the single-letter theory end to end.
//!
//! All rates, thresholds, entropies, and exponents are in nats.
//!
//! # Modules
//!
//! - [`channel`]: alphabets, channels, parametric channel families, joint
//!   types, and basic information measures.
//! - [`exponents`]: the exponent computations `E0`, `E1`, `E2`, `F`, the
//!   pairwise exponent, `xi*(R,T)` with fixed and per-channel thresholds,
//!   Gallager's function, and the moment bound `U`.
//! - [`decoders`]: the matched threshold decoder, the universal
//!   competitive-minimax decoder (sum and max-alpha variants), and the
//!   variable-threshold universal decoder.
//! - [`sim`]: random codebook ensembles, exact and Monte Carlo error
//!   probabilities, ensemble minimax-ratio tracking, and exponent slope fits.
//! - [`oracle`]: brute-force reference implementations (simplex-grid inner
//!   optimizations, exhaustive expectations, per-output assignment search)
//!   used to gate the closed forms.
//! - [`verify`]: the machine-checkable verification suites shared by the CLI
//!   and the acceptance tests.
//!
//! # Example
//!
//! ```
//! use erax_core::channel::{ChannelFamily, Dmc};
//! use erax_core::exponents::{e1_detailed, xi_star, GridSpec};
//!
//! let ch = Dmc::bsc(0.1).unwrap();
//! let grid = GridSpec::default();
//! let e1 = e1_detailed(0.1, 0.05, &ch, None, &grid).unwrap();
//! assert!(e1.value > 0.0);
//!
//! let fam = ChannelFamily::bsc_grid(&[0.05, 0.1, 0.2]).unwrap();
//! let xi = xi_star(0.1, 0.05, &fam, &grid).unwrap();
//! assert!(xi.xi > 0.0 && xi.xi <= 1.0);
//! ```

pub mod channel;
pub mod decoders;
pub mod exec;
pub mod exponents;
pub mod oracle;
pub mod sim;
pub mod tol;
pub mod verify;

use thiserror::Error;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A probability vector or matrix failed validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// A channel or family definition failed validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    /// Vector lengths disagree where equal lengths are required.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    /// A symbol index lies outside its alphabet.
    #[error("symbol out of range: {0}")]
    SymbolOutOfRange(String),
    /// A numeric argument violated its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// An exact-enumeration or codebook request exceeded the configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    /// Reading or writing an artifact failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// An artifact failed to parse.
    #[error("artifact format error: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
