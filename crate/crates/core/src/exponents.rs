//! Single-letter exponent computations.
//!
//! Everything here is a pure function of channels and rates, in nats:
//! the erasure-decoding exponents `E0`, `E1(R,T)`, `E2 = E1 + T`, the tilted
//! conditional-entropy exponent `F`, the pairwise two-channel exponent, the
//! universally achievable fraction `xi*(R,T)` (fixed and per-channel
//! thresholds), Gallager's random-coding function, and the codeword-average
//! moment `U` with its type bound.
//!
//! Inner optimizations over distributions use closed forms (tilted
//! distributions); each closed form is gated by a brute-force simplex-grid
//! oracle in [`crate::oracle`] before being trusted. Searches over `(s, rho)`
//! run on a lower-triangle grid (default step 0.01) followed by an optional
//! three-round local refinement, plus a targeted probe point that restores
//! the exact `T = 0` saddle the coarse grid misses.

use crate::channel::{safe_ln, ChannelFamily, Dmc};
use crate::exec;
use crate::tol::{DEN_VANISH_TOL, EXPONENT_ALIVE_TOL, NUM_ELIG_TOL};
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Grid resolutions for the numerical searches.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    /// Step of the `s` axis in `0 <= s <= rho <= 1`.
    pub step_s: f64,
    /// Step of the `rho` axis.
    pub step_rho: f64,
    /// Step used when building parameter grids for channel families.
    pub step_theta: f64,
    /// Simplex discretization granularity for the brute-force inner
    /// optimizations (oracles only; the closed forms need no grid).
    pub step_py: f64,
    /// Run the three-round local refinement around coarse optima.
    pub refine: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            step_s: 0.01,
            step_rho: 0.01,
            step_theta: 0.01,
            step_py: 0.01,
            refine: true,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("step_s", self.step_s),
            ("step_rho", self.step_rho),
            ("step_theta", self.step_theta),
            ("step_py", self.step_py),
        ] {
            if !(v > 0.0 && v <= 0.5) {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} = {v} outside (0, 0.5]"
                )));
            }
        }
        Ok(())
    }
}

/// Precomputed `E1` values over a family grid, all at one rate; thresholds
/// may vary per grid point (used by the variable-threshold decoder).
#[derive(Debug, Clone)]
pub struct ExponentTable {
    /// Rate in nats.
    pub r: f64,
    /// Threshold per grid point (all equal for the fixed-threshold case).
    pub thresholds: Vec<f64>,
    /// Family grid labels.
    pub labels: Vec<f64>,
    /// `E1(R, T_i, theta_i)` per grid point.
    pub e1: Vec<f64>,
}

impl ExponentTable {
    /// The single threshold when all grid points share one.
    pub fn uniform_threshold(&self) -> Option<f64> {
        let t0 = *self.thresholds.first()?;
        self.thresholds.iter().all(|&t| t == t0).then_some(t0)
    }

    /// Serializes to the JSON cache schema
    /// `{"R": .., "T": .., "grid": [..], "e1": [..]}` (uniform threshold
    /// only).
    pub fn to_json(&self) -> Result<String> {
        let t = self.uniform_threshold().ok_or_else(|| {
            CoreError::Format("only uniform-threshold tables serialize to the cache schema".into())
        })?;
        let artifact = ExponentTableArtifact {
            r: self.r,
            t,
            grid: self.labels.clone(),
            e1: self.e1.clone(),
        };
        serde_json::to_string_pretty(&artifact).map_err(|e| CoreError::Format(e.to_string()))
    }

    /// Parses the JSON cache schema.
    pub fn from_json(text: &str) -> Result<Self> {
        let artifact: ExponentTableArtifact =
            serde_json::from_str(text).map_err(|e| CoreError::Format(e.to_string()))?;
        if artifact.grid.len() != artifact.e1.len() {
            return Err(CoreError::Format(
                "grid and e1 arrays differ in length".into(),
            ));
        }
        Ok(Self {
            r: artifact.r,
            thresholds: vec![artifact.t; artifact.grid.len()],
            labels: artifact.grid,
            e1: artifact.e1,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ExponentTableArtifact {
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "T")]
    t: f64,
    grid: Vec<f64>,
    e1: Vec<f64>,
}

/// Result of a `xi*` evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiResult {
    /// The achievable fraction, clamped to `[0, 1]`.
    pub xi: f64,
    /// Grid indices of the minimizing channel pair (absent when the
    /// vanishing-denominator convention decided the value).
    pub pair_indices: Option<(usize, usize)>,
    /// Family labels of the minimizing pair.
    pub pair_labels: Option<(f64, f64)>,
    /// The `(s, rho)` witness where the minimizing pair attains its ratio
    /// maximum.
    pub point: Option<(f64, f64)>,
    /// True when every channel pair had a vanishing denominator everywhere
    /// and the value 1 was assigned by convention.
    pub degenerate: bool,
}

/// `E1` value together with its maximizing grid point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct E1Detail {
    /// The exponent (clamped at 0).
    pub value: f64,
    /// Maximizing `(s, rho)`.
    pub argmax: (f64, f64),
}

// ---------------------------------------------------------------------------
// Elementary closed forms
// ---------------------------------------------------------------------------

/// `ln` of the per-output tilted sum `sum over x of P(y|x)^lam`, one entry
/// per output symbol.
fn ln_tilted_sums(ch: &Dmc, lam: f64) -> Vec<f64> {
    (0..ch.output_size())
        .map(|y| {
            let s: f64 = (0..ch.input_size()).map(|x| ch.prob(x, y).powf(lam)).sum();
            safe_ln(s)
        })
        .collect()
}

/// Log-sum-exp with max subtraction.
fn lse(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

/// The two-channel exponent
/// `min over P_y of [F(P_y, 1-s, A) + rho F(P_y, s/rho, B) - H(Y)]`,
/// via the closed form
/// `(1+rho) ln|X| - ln sum over y of A_y B_y^rho` with
/// `A_y = sum over x of P_A(y|x)^(1-s)` and
/// `B_y = sum over x of P_B(y|x)^(s/rho)` (the minimizer is the normalized
/// tilted output law; gated by the simplex-grid oracle).
pub fn pair_exponent(ch_a: &Dmc, ch_b: &Dmc, rho: f64, s: f64) -> Result<f64> {
    check_s_rho(s, rho)?;
    if ch_a.input_size() != ch_b.input_size() || ch_a.output_size() != ch_b.output_size() {
        return Err(CoreError::LengthMismatch(
            "paired channels must share alphabets".into(),
        ));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let ln_a = ln_tilted_sums(ch_a, 1.0 - s);
    let ln_b = ln_tilted_sums(ch_b, s / rho);
    let terms: Vec<f64> = ln_a
        .iter()
        .zip(ln_b.iter())
        .map(|(&a, &b)| a + rho * b)
        .collect();
    let lnx = (ch_a.input_size() as f64).ln();
    Ok((1.0 + rho) * lnx - lse(&terms))
}

fn check_s_rho(s: f64, rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) || !(0.0..=1.0).contains(&s) {
        return Err(CoreError::InvalidArgument(format!(
            "(s, rho) = ({s}, {rho}) outside the unit square"
        )));
    }
    if s > rho {
        if rho == 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "rho = 0 admits only s = 0, got s = {s}"
            )));
        }
        return Err(CoreError::InvalidArgument(format!(
            "s = {s} exceeds rho = {rho}"
        )));
    }
    Ok(())
}

/// The erasure random-coding kernel
/// `-ln sum over y of (sum over x of q(x) P(y|x)^(1-s)) *
/// (sum over x of q(x) P(y|x)^(s/rho))^rho`.
///
/// `q = None` means the uniform input distribution, for which this equals
/// [`pair_exponent`] of the channel against itself.
pub fn e0_forney(s: f64, rho: f64, q: Option<&[f64]>, ch: &Dmc) -> Result<f64> {
    check_s_rho(s, rho)?;
    let q = validated_q(q, ch)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let mut terms = Vec::with_capacity(ch.output_size());
    for y in 0..ch.output_size() {
        let a: f64 = (0..ch.input_size())
            .map(|x| q[x] * ch.prob(x, y).powf(1.0 - s))
            .sum();
        let b: f64 = (0..ch.input_size())
            .map(|x| q[x] * ch.prob(x, y).powf(s / rho))
            .sum();
        terms.push(safe_ln(a) + rho * safe_ln(b));
    }
    Ok(-lse(&terms))
}

fn validated_q(q: Option<&[f64]>, ch: &Dmc) -> Result<Vec<f64>> {
    match q {
        None => Ok(vec![1.0 / ch.input_size() as f64; ch.input_size()]),
        Some(q) => {
            if q.len() != ch.input_size() {
                return Err(CoreError::LengthMismatch(format!(
                    "q has {} entries for |X| = {}",
                    q.len(),
                    ch.input_size()
                )));
            }
            let sum: f64 = q.iter().sum();
            if q.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > crate::tol::DIST_SUM_TOL {
                return Err(CoreError::InvalidDistribution(
                    "q is not a probability vector".into(),
                ));
            }
            Ok(q.to_vec())
        }
    }
}

/// `E2(R,T) = E1(R,T) + T`: the undetected-error exponent sits exactly `T`
/// above the total-error exponent.
pub fn e2(e1_value: f64, t: f64) -> f64 {
    e1_value + t
}

/// The tilted conditional-entropy exponent
/// `F(P_y, lam, ch) = ln|X| - max over P_{x|y} of [H(X|Y) + lam E ln P(Y|X)]`,
/// via the closed form
/// `ln|X| - sum over y of P_y(y) ln(sum over x of P(y|x)^lam)` (the per-output
/// maximizer is the tilted distribution proportional to `P(y|x)^lam`; gated
/// by the simplex-grid oracle).
pub fn f_exponent(py: &[f64], lambda: f64, ch: &Dmc) -> Result<f64> {
    if lambda < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "lambda = {lambda} must be nonnegative"
        )));
    }
    if py.len() != ch.output_size() {
        return Err(CoreError::LengthMismatch(format!(
            "P_y has {} entries for |Y| = {}",
            py.len(),
            ch.output_size()
        )));
    }
    crate::channel::entropy(py)?;
    let ln_sums = ln_tilted_sums(ch, lambda);
    let lnx = (ch.input_size() as f64).ln();
    let mut acc = 0.0;
    for (y, &p) in py.iter().enumerate() {
        if p > 0.0 {
            acc += p * ln_sums[y];
        }
    }
    Ok(lnx - acc)
}

/// Gallager's binary-symmetric random-coding function
/// `E(theta, rho) = rho ln 2 - (1+rho) ln[theta^(1/(1+rho)) +
/// (1-theta)^(1/(1+rho))] - rho R`.
pub fn gallager_e(theta: f64, rho: f64, r: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(CoreError::InvalidArgument(format!(
            "theta = {theta} outside (0, 1/2]"
        )));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(CoreError::InvalidArgument(format!(
            "rho = {rho} outside [0, 1]"
        )));
    }
    let lam = 1.0 / (1.0 + rho);
    let g = (theta.powf(lam) + (1.0 - theta).powf(lam)).ln();
    Ok(rho * std::f64::consts::LN_2 - (1.0 + rho) * g - rho * r)
}

/// The log codeword-average moment under i.i.d. uniform inputs:
/// `ln U(y, lam, ch) = sum over i of ln[(1/|X|) sum over x of P(y_i|x)^lam]`.
///
/// Satisfies the type bound
/// `ln U <= |Y| (|X|-1) ln(n+1) - n F(type(y), lam, ch)`.
pub fn u_moment(y: &[u8], lambda: f64, ch: &Dmc) -> Result<f64> {
    if lambda < 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "lambda = {lambda} must be nonnegative"
        )));
    }
    let ln_sums = ln_tilted_sums(ch, lambda);
    let lnx = (ch.input_size() as f64).ln();
    let mut total = 0.0;
    for &b in y {
        let b = b as usize;
        if b >= ch.output_size() {
            return Err(CoreError::SymbolOutOfRange(format!(
                "output symbol {b} with |Y| = {}",
                ch.output_size()
            )));
        }
        total += ln_sums[b] - lnx;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Grid engine: triangle grid, refinement, probe
// ---------------------------------------------------------------------------

/// Lower-triangle grid over `0 < s <= rho <= 1`. The `rho = 0` column
/// contributes only the value 0 (only `s = 0` is feasible there), so it is
/// represented by the clamp at zero rather than by grid points.
struct TriGrid {
    ks: usize,
    kr: usize,
    /// `(j, k)` with `s = j/ks`, `rho = k/kr`, constrained to `s <= rho`
    /// via the exact integer test `j * kr <= k * ks`.
    pts: Vec<(usize, usize)>,
}

impl TriGrid {
    fn new(step_s: f64, step_rho: f64) -> Self {
        let ks = (1.0 / step_s).round().max(1.0) as usize;
        let kr = (1.0 / step_rho).round().max(1.0) as usize;
        let mut pts = Vec::new();
        for k in 1..=kr {
            for j in 1..=ks {
                if j * kr <= k * ks {
                    pts.push((j, k));
                }
            }
        }
        Self { ks, kr, pts }
    }

    fn s(&self, j: usize) -> f64 {
        j as f64 / self.ks as f64
    }

    fn rho(&self, k: usize) -> f64 {
        k as f64 / self.kr as f64
    }
}

/// Three-round local maximization around `(s0, rho0)`: a 21x21 window whose
/// width shrinks tenfold each round, restricted to `0 < s <= rho <= 1`.
/// Ties keep the incumbent, so the search is deterministic.
fn refine_max<F: Fn(f64, f64) -> f64>(
    f: &F,
    mut s: f64,
    mut rho: f64,
    mut v: f64,
    w0: f64,
    rounds: usize,
) -> (f64, f64, f64) {
    let mut w = w0;
    for _ in 0..rounds {
        let h = w / 10.0;
        let (mut bs, mut br, mut bv) = (s, rho, v);
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                let ss = s + f64::from(i) * h;
                let mut rr = rho + f64::from(j) * h;
                if ss <= 1e-12 || rr > 1.0 + 1e-12 || ss > rr + 1e-12 {
                    continue;
                }
                rr = rr.min(1.0);
                let vv = f(ss, rr);
                if vv > bv {
                    bs = ss;
                    br = rr;
                    bv = vv;
                }
            }
        }
        s = bs;
        rho = br;
        v = bv;
        w = h;
    }
    (s, rho, v)
}

/// Gallager-style objective for a general channel under uniform inputs:
/// `G(rho) = -ln sum over y of (sum over x of q(x) P(y|x)^(1/(1+rho)))^(1+rho)
/// - rho R`, maximized over `rho in [0, 1]` by ternary search (the objective
/// is concave in `rho`).
fn gallager_rho_star(ch: &Dmc, r: f64) -> f64 {
    let q = 1.0 / ch.input_size() as f64;
    let g = |rho: f64| -> f64 {
        let lam = 1.0 / (1.0 + rho);
        let mut terms = Vec::with_capacity(ch.output_size());
        for y in 0..ch.output_size() {
            let inner: f64 = (0..ch.input_size())
                .map(|x| q * ch.prob(x, y).powf(lam))
                .sum();
            terms.push((1.0 + rho) * safe_ln(inner));
        }
        -lse(&terms) - rho * r
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    0.5 * (lo + hi)
}

/// The shared evaluation engine behind `e1`, `xi_star`, and
/// `xi_star_variable`. Holds per-channel tilted-sum tables over the triangle
/// grid so pair scans are table lookups, with exact (off-grid) evaluation for
/// refinement and probe points.
struct XiEngine<'a> {
    fam: &'a ChannelFamily,
    grid: TriGrid,
    refine: bool,
    r: f64,
    /// Threshold of each grid channel (constant vector for fixed `T`).
    t_per: Vec<f64>,
    lnx: f64,
    /// `ln A` tables: `[channel][j-1][y]` for the `(1-s)` tilt.
    ln_a: Vec<Vec<Vec<f64>>>,
    /// `ln B` tables: `[channel][point][y]` for the `s/rho` tilt.
    ln_b: Vec<Vec<Vec<f64>>>,
    /// Per-channel Gallager maximizer (probe anchor).
    rho_star: Vec<f64>,
}

impl<'a> XiEngine<'a> {
    fn new(fam: &'a ChannelFamily, r: f64, t_per: Vec<f64>, g: &GridSpec) -> Self {
        let grid = TriGrid::new(g.step_s, g.step_rho);
        let lnx = (fam.input_size() as f64).ln();
        let ln_a: Vec<Vec<Vec<f64>>> = exec::map_indexed(fam.len(), |c| {
            (1..=grid.ks)
                .map(|j| ln_tilted_sums(fam.channel(c), 1.0 - grid.s(j)))
                .collect()
        });
        let ln_b: Vec<Vec<Vec<f64>>> = exec::map_indexed(fam.len(), |c| {
            grid.pts
                .iter()
                .map(|&(j, k)| ln_tilted_sums(fam.channel(c), grid.s(j) / grid.rho(k)))
                .collect()
        });
        let rho_star = exec::map_indexed(fam.len(), |c| gallager_rho_star(fam.channel(c), r));
        Self {
            fam,
            grid,
            refine: g.refine,
            r,
            t_per,
            lnx,
            ln_a,
            ln_b,
            rho_star,
        }
    }

    /// Pair numerator at grid point index `p` from the tables.
    fn num_at(&self, a: usize, b: usize, p: usize) -> f64 {
        let (j, k) = self.grid.pts[p];
        let (s, rho) = (self.grid.s(j), self.grid.rho(k));
        let la = &self.ln_a[a][j - 1];
        let lb = &self.ln_b[b][p];
        let terms: Vec<f64> = la
            .iter()
            .zip(lb.iter())
            .map(|(&x, &y)| x + rho * y)
            .collect();
        (1.0 + rho) * self.lnx - lse(&terms) - rho * self.r - s * self.t_per[b]
    }

    /// Pair numerator at an arbitrary `(s, rho)` via the closed form.
    fn num_exact(&self, a: usize, b: usize, s: f64, rho: f64) -> f64 {
        let pe = pair_exponent(self.fam.channel(a), self.fam.channel(b), rho, s)
            .unwrap_or(f64::NEG_INFINITY);
        pe - rho * self.r - s * self.t_per[b]
    }

    /// The probe point for pair `(a, b)`: the grid-free saddle suggested by
    /// the per-channel Gallager maximizers, which at `T = 0` makes
    /// numerator and denominator coincide exactly.
    fn probe_point(&self, a: usize, b: usize) -> Option<(f64, f64)> {
        let ra = self.rho_star[a];
        let rb = self.rho_star[b];
        let s_id = ra / (1.0 + ra);
        let rho_id = (s_id * (1.0 + rb)).min(1.0);
        (s_id > 1e-12 && s_id <= rho_id).then_some((s_id, rho_id))
    }

    /// `E1` of channel `i` at its own threshold: grid max of the diagonal
    /// numerator, refined and probed, clamped at zero.
    fn e1_of(&self, i: usize) -> E1Detail {
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0.0, 0.0);
        for p in 0..self.grid.pts.len() {
            let v = self.num_at(i, i, p);
            if v > best {
                best = v;
                let (j, k) = self.grid.pts[p];
                arg = (self.grid.s(j), self.grid.rho(k));
            }
        }
        let f = |s: f64, rho: f64| self.num_exact(i, i, s, rho);
        if self.refine {
            let (s, rho, v) = refine_max(&f, arg.0, arg.1, best, self.grid_step(), 3);
            best = v;
            arg = (s, rho);
        }
        if let Some((sp, rp)) = self.probe_point(i, i) {
            let vp = f(sp, rp);
            let (sp, rp, vp) = if self.refine {
                refine_max(&f, sp, rp, vp, 0.005, 3)
            } else {
                (sp, rp, vp)
            };
            if vp > best {
                best = vp;
                arg = (sp, rp);
            }
        }
        if best <= 0.0 {
            // The (s, rho) = (0, 0) corner always attains 0.
            E1Detail {
                value: 0.0,
                argmax: (0.0, 0.0),
            }
        } else {
            E1Detail {
                value: best,
                argmax: arg,
            }
        }
    }

    fn grid_step(&self) -> f64 {
        (1.0 / self.grid.ks as f64).max(1.0 / self.grid.kr as f64)
    }

    /// Max over eligible grid points (numerator nonnegative, denominator
    /// nonvanishing) of numerator/denominator for an included off-diagonal
    /// pair, refined and probed. `None` when no point is eligible. Diagonal
    /// pairs never reach here: their cap is exactly 1 (the numerator maximum
    /// over the same search space is the denominator), which the caller
    /// short-circuits.
    fn pair_cap(&self, a: usize, b: usize, e1a: f64, e1b: f64) -> Option<(f64, (f64, f64))> {
        debug_assert_ne!(a, b);
        let den = move |s: f64| (1.0 - s) * e1a + s * e1b;
        let ratio = |s: f64, rho: f64| -> f64 {
            let n = self.num_exact(a, b, s, rho);
            let d = den(s);
            if n < NUM_ELIG_TOL || d <= DEN_VANISH_TOL {
                f64::NEG_INFINITY
            } else {
                n / d
            }
        };
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0.0, 0.0);
        for p in 0..self.grid.pts.len() {
            let n = self.num_at(a, b, p);
            let (j, k) = self.grid.pts[p];
            let s = self.grid.s(j);
            let d = den(s);
            if n < NUM_ELIG_TOL || d <= DEN_VANISH_TOL {
                continue;
            }
            let v = n / d;
            if v > best {
                best = v;
                arg = (s, self.grid.rho(k));
            }
        }
        if best.is_finite() && self.refine {
            let (s, rho, v) = refine_max(&ratio, arg.0, arg.1, best, self.grid_step(), 3);
            best = v;
            arg = (s, rho);
        }
        if let Some((sp, rp)) = self.probe_point(a, b) {
            let vp = ratio(sp, rp);
            if vp.is_finite() {
                let (sp, rp, vp) = if self.refine {
                    refine_max(&ratio, sp, rp, vp, 0.005, 3)
                } else {
                    (sp, rp, vp)
                };
                if vp > best {
                    best = vp;
                    arg = (sp, rp);
                }
            }
        }
        best.is_finite().then_some((best, arg))
    }
}

// ---------------------------------------------------------------------------
// Public exponent operations
// ---------------------------------------------------------------------------

/// `E1(R, T)`: maximum over `0 <= s <= rho <= 1` of
/// `E0(s, rho) - rho R - s T`, clamped at zero (the origin always attains 0).
/// The input distribution is fixed (uniform when `q` is `None`); the max over
/// input distributions is deliberately not taken.
pub fn e1(r: f64, t: f64, ch: &Dmc, q: Option<&[f64]>, g: &GridSpec) -> Result<f64> {
    Ok(e1_detailed(r, t, ch, q, g)?.value)
}

/// [`e1`] with the maximizing `(s, rho)` witness.
pub fn e1_detailed(r: f64, t: f64, ch: &Dmc, q: Option<&[f64]>, g: &GridSpec) -> Result<E1Detail> {
    check_rate_threshold(r, t)?;
    g.validate()?;
    match q {
        None => {
            let fam = ChannelFamily::general(vec![ch.clone()])?;
            let engine = XiEngine::new(&fam, r, vec![t], g);
            Ok(engine.e1_of(0))
        }
        Some(_) => {
            // Forward-compatibility path for a nonuniform input law: direct
            // grid search over the kernel (no probe; the probe anchor is
            // derived for the uniform ensemble).
            let grid = TriGrid::new(g.step_s, g.step_rho);
            let mut best = f64::NEG_INFINITY;
            let mut arg = (0.0, 0.0);
            for &(j, k) in &grid.pts {
                let (s, rho) = (grid.s(j), grid.rho(k));
                let v = e0_forney(s, rho, q, ch)? - rho * r - s * t;
                if v > best {
                    best = v;
                    arg = (s, rho);
                }
            }
            if g.refine {
                let f = |s: f64, rho: f64| {
                    e0_forney(s, rho, q, ch).map_or(f64::NEG_INFINITY, |e0| e0 - rho * r - s * t)
                };
                let (s, rho, v) = refine_max(&f, arg.0, arg.1, best, g.step_s.max(g.step_rho), 3);
                best = v;
                arg = (s, rho);
            }
            if best <= 0.0 {
                Ok(E1Detail {
                    value: 0.0,
                    argmax: (0.0, 0.0),
                })
            } else {
                Ok(E1Detail {
                    value: best,
                    argmax: arg,
                })
            }
        }
    }
}

fn check_rate_threshold(r: f64, t: f64) -> Result<()> {
    if r < 0.0 || !r.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "rate R = {r} must be nonnegative"
        )));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold T = {t} must be nonnegative"
        )));
    }
    Ok(())
}

/// Builds the `E1` table of a family at one `(R, T)`.
pub fn exponent_table(fam: &ChannelFamily, r: f64, t: f64, g: &GridSpec) -> Result<ExponentTable> {
    exponent_table_variable(fam, r, &vec![t; fam.len()], g)
}

/// Builds the `E1` table of a family at rate `R` with a per-channel
/// threshold map (entry `i` applies to grid point `i`).
pub fn exponent_table_variable(
    fam: &ChannelFamily,
    r: f64,
    t_map: &[f64],
    g: &GridSpec,
) -> Result<ExponentTable> {
    check_rate_threshold(r, 0.0)?;
    g.validate()?;
    if t_map.len() != fam.len() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold map covers {} grid points, family has {}",
            t_map.len(),
            fam.len()
        )));
    }
    if let Some(&bad) = t_map.iter().find(|&&t| t < 0.0 || !t.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "threshold map entry {bad} must be nonnegative"
        )));
    }
    let engine = XiEngine::new(fam, r, t_map.to_vec(), g);
    let e1: Vec<f64> = exec::map_indexed(fam.len(), |i| engine.e1_of(i).value);
    Ok(ExponentTable {
        r,
        thresholds: t_map.to_vec(),
        labels: (0..fam.len()).map(|i| fam.label(i)).collect(),
        e1,
    })
}

/// The universally achievable exponent fraction `xi*(R, T)`:
/// the minimum over channel pairs `(theta, theta~)` of the maximum over
/// `0 <= s <= rho <= 1` of
/// `[pair numerator] / [(1-s) E1(R,T,theta) + s E1(R,T,theta~)]`.
///
/// Pairs in which either channel has `E1 = 0` impose no competitive
/// constraint and are excluded from the minimum; points with a negative
/// numerator certify nothing and are skipped inside the maximum. When every
/// channel in the family has `E1 = 0` the vanishing-denominator convention
/// assigns the value 1 (degenerate flag set). The result is clamped to
/// `[0, 1]`; a singleton family yields exactly 1.
pub fn xi_star(r: f64, t: f64, fam: &ChannelFamily, g: &GridSpec) -> Result<XiResult> {
    check_rate_threshold(r, t)?;
    xi_star_impl(r, vec![t; fam.len()], fam, g)
}

/// `xi*` with a per-channel threshold map: the numerator charges `s T` at
/// the second slot's threshold and the denominator mixes each channel's own
/// `E1(R, T_theta, theta)`.
pub fn xi_star_variable(
    r: f64,
    t_map: &[f64],
    fam: &ChannelFamily,
    g: &GridSpec,
) -> Result<XiResult> {
    check_rate_threshold(r, 0.0)?;
    if t_map.len() != fam.len() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold map covers {} grid points, family has {}",
            t_map.len(),
            fam.len()
        )));
    }
    if let Some(&bad) = t_map.iter().find(|&&t| t < 0.0 || !t.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "threshold map entry {bad} must be nonnegative"
        )));
    }
    xi_star_impl(r, t_map.to_vec(), fam, g)
}

fn xi_star_impl(r: f64, t_per: Vec<f64>, fam: &ChannelFamily, g: &GridSpec) -> Result<XiResult> {
    if fam.is_empty() {
        return Err(CoreError::InvalidChannel("family grid is empty".into()));
    }
    g.validate()?;
    let engine = XiEngine::new(fam, r, t_per, g);
    let details: Vec<E1Detail> = exec::map_indexed(fam.len(), |i| engine.e1_of(i));
    let alive: Vec<usize> = (0..fam.len())
        .filter(|&i| details[i].value > EXPONENT_ALIVE_TOL)
        .collect();
    if alive.is_empty() {
        return Ok(XiResult {
            xi: 1.0,
            pair_indices: None,
            pair_labels: None,
            point: None,
            degenerate: true,
        });
    }
    let pairs: Vec<(usize, usize)> = alive
        .iter()
        .flat_map(|&a| alive.iter().map(move |&b| (a, b)))
        .collect();
    let caps: Vec<Option<(f64, (f64, f64))>> = exec::map_indexed(pairs.len(), |i| {
        let (a, b) = pairs[i];
        if a == b {
            // The diagonal ratio maximum is the exponent divided by itself.
            Some((1.0, details[a].argmax))
        } else {
            engine.pair_cap(a, b, details[a].value, details[b].value)
        }
    });
    let mut best: Option<(f64, usize)> = None;
    for (i, cap) in caps.iter().enumerate() {
        if let Some((v, _)) = cap {
            if best.map_or(true, |(bv, _)| *v < bv) {
                best = Some((*v, i));
            }
        }
    }
    // A live channel's diagonal pair always has eligible points (its own E1
    // maximizer), so `best` is populated whenever `alive` is nonempty.
    let (v, i) = best.expect("a live diagonal pair is always eligible");
    let (a, b) = pairs[i];
    let point = caps[i].map(|(_, p)| p);
    Ok(XiResult {
        xi: v.clamp(0.0, 1.0),
        pair_indices: Some((a, b)),
        pair_labels: Some((fam.label(a), fam.label(b))),
        point,
        degenerate: false,
    })
}

// ---------------------------------------------------------------------------
// xi-table CSV artifact
// ---------------------------------------------------------------------------

/// One row of a `xi*` table artifact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct XiRow {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub xi: f64,
    pub theta: f64,
    pub theta_tilde: f64,
    pub s: f64,
    pub rho: f64,
    pub degenerate: bool,
}

impl XiRow {
    /// Flattens a [`XiResult`] into a CSV row (degenerate witnesses become
    /// zeros).
    pub fn new(r: f64, t: f64, res: &XiResult) -> Self {
        let (theta, theta_tilde) = res.pair_labels.unwrap_or((0.0, 0.0));
        let (s, rho) = res.point.unwrap_or((0.0, 0.0));
        Self {
            r,
            t,
            xi: res.xi,
            theta,
            theta_tilde,
            s,
            rho,
            degenerate: res.degenerate,
        }
    }
}

/// Writes rows as CSV with the header
/// `R,T,xi,theta,theta_tilde,s,rho,degenerate`, preceded by optional `#`
/// comment lines (used by callers to embed run configuration).
pub fn write_xi_csv<W: Write>(mut w: W, comments: &[String], rows: &[XiRow]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let mut csv_w = csv::Writer::from_writer(w);
    for row in rows {
        csv_w
            .serialize(row)
            .map_err(|e| CoreError::Format(e.to_string()))?;
    }
    csv_w.flush()?;
    Ok(())
}

/// Reads a `xi*` CSV artifact, skipping `#` comment lines.
pub fn read_xi_csv<R: BufRead>(r: R) -> Result<Vec<XiRow>> {
    let mut body = String::new();
    for line in r.lines() {
        let line = line?;
        if line.trim_start().starts_with('#') {
            continue;
        }
        body.push_str(&line);
        body.push('\n');
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec.map_err(|e| CoreError::Format(e.to_string()))?);
    }
    Ok(rows)
}
