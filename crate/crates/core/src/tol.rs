//! Centralized numeric tolerances and sentinels.
//!
//! Every threshold used by the library and its test suites lives here so the
//! contracts stay auditable in one place.

/// Row sums of a channel matrix must match 1 to this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Distribution vectors must sum to 1 to this tolerance.
pub const DIST_SUM_TOL: f64 = 1e-10;

/// Finite stand-in for `ln 0`. Keeps score orderings total and log-sum-exp
/// arithmetic free of `inf - inf` while being far below any reachable
/// log-probability (`n * ln p` with n in the thousands stays above -1e7).
pub const LOG_ZERO: f64 = -1e300;

/// A denominator of the competitive ratio below this value is treated as
/// vanishing (the channel pair imposes no constraint at that point).
pub const DEN_VANISH_TOL: f64 = 1e-9;

/// Numerator eligibility for the competitive ratio: values at or above this
/// (slightly negative) threshold count as nonnegative, absorbing roundoff at
/// the zero boundary.
pub const NUM_ELIG_TOL: f64 = -1e-12;

/// An exponent at or below this value is treated as zero when deciding which
/// channels impose a competitive constraint (same scale as
/// [`DEN_VANISH_TOL`]).
pub const EXPONENT_ALIVE_TOL: f64 = 1e-9;

/// Exact-enumeration identity `Pr{erasure} = Pr{E1} - Pr{E2}` must hold to
/// this tolerance.
pub const EXACT_IDENTITY_TOL: f64 = 1e-12;

/// Agreement required between a closed-form inner optimization and its
/// brute-force simplex-grid oracle at grid step 0.01 with refinement.
pub const CLOSED_FORM_ORACLE_TOL: f64 = 5e-3;

/// Agreement required between the general closed forms and the hand algebra
/// for the binary symmetric channel.
pub const BSC_CLOSED_FORM_TOL: f64 = 1e-9;

/// The Gallager-style decomposition identity of the pair numerator at T = 0
/// must hold to this tolerance.
pub const DECOMPOSITION_TOL: f64 = 1e-9;

/// Default cap on the number of output vectors an exact enumeration may
/// visit (`|Y|^n` must stay at or below this).
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 20;

/// Default cap on total sampled symbols (`M * n`) per codebook draw.
pub const DEFAULT_CODEBOOK_BUDGET: u64 = 1 << 26;

/// Broad agreement band against the published `xi*` reference table. The
/// published values carry three decimals, so a half-ulp (0.0005) of rounding
/// slack is added to the nominal 0.02.
pub const TABLE_BROAD_TOL: f64 = 0.0205;

/// Tight agreement band against the published `xi*` reference table
/// (nominal 0.01 plus rounding slack).
pub const TABLE_TIGHT_TOL: f64 = 0.0105;

/// Minimum number of the 49 reference cells that must sit inside
/// [`TABLE_TIGHT_TOL`].
pub const TABLE_TIGHT_MIN_COUNT: usize = 44;

/// The zero-threshold column of the reference table must equal 1 to this
/// tolerance.
pub const ZERO_THRESHOLD_TOL: f64 = 0.005;
