//! Random-coding ensembles and error-probability measurement.
//!
//! Small block lengths make the three event probabilities exactly computable
//! by enumerating the whole output space, which is the honest way to check
//! exponent claims at desk scale; Monte Carlo sampling covers instances past
//! the enumeration budget. Both paths are bit-reproducible: random numbers
//! come from a counter-based derivation keyed by `(seed, stream, index)`, so
//! results do not depend on thread scheduling, and accumulation happens in
//! fixed chunk order.

use crate::channel::{message_count, Codebook, ChannelFamily, Dmc};
use crate::decoders::{
    forney_decode, universal_decode, DecodeResult, Outcome, UniversalContext, Variant,
};
use crate::exec;
use crate::exponents::{exponent_table, GridSpec};
use crate::tol::DEFAULT_CODEBOOK_BUDGET;
use crate::{CoreError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Monte Carlo standard errors for the three event probabilities.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct StdErrs {
    pub pr_e1: f64,
    pub pr_e2: f64,
    pub pr_erasure: f64,
}

/// The three event probabilities (total error, undetected error, erasure),
/// the Lagrangian `gamma = Pr{E2} + e^{-nT} Pr{E1}`, and Monte Carlo
/// standard errors when applicable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ErrorStats {
    pub pr_e1: f64,
    pub pr_e2: f64,
    pub pr_erasure: f64,
    pub gamma: f64,
    pub stderr: Option<StdErrs>,
}

/// Which decoding rule an ensemble run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DecoderKind {
    /// The matched likelihood-ratio rule, re-matched to each grid channel
    /// it is evaluated against.
    Forney,
    /// The channel-independent rule, fixed once per run.
    Universal { variant: Variant },
}

/// Ensemble stats against one family grid channel.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PerThetaStats {
    pub theta: f64,
    pub pr_e1: f64,
    pub pr_e2: f64,
    pub pr_erasure: f64,
    pub gamma: f64,
    /// Codebook-averaged `gamma / e^{-n [xi E1(theta) + T]}`.
    pub ratio: f64,
}

/// Result of an ensemble run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub n: usize,
    /// Number of sampled codebooks.
    pub trials: usize,
    /// Grand average over codebooks and (uniformly) over the family grid.
    pub avg: ErrorStats,
    /// The codebook average of `K_n = max over grid channels of
    /// gamma_theta / e^{-n [xi E1(theta) + T]}`.
    pub kn_ratio: f64,
    pub seed: u64,
    pub per_theta: Vec<PerThetaStats>,
}

/// Least-squares fit of `-ln p` against `n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Estimated exponent in nats per symbol.
    pub slope: f64,
    /// Intercept of `-ln p` at `n = 0`.
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Points dropped because the probability estimate was zero.
    pub censored: usize,
}

// ---------------------------------------------------------------------------
// Deterministic RNG derivation
// ---------------------------------------------------------------------------

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generator keyed by `(seed, stream, index)`: the same triple always
/// yields the same stream, independent of scheduling.
fn derive_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mixed = splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Sub-seed for one unit of work (codebook index, trial block, ...).
fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws an `M x n` codebook with i.i.d. symbols uniform over the input
/// alphabet. Deterministic per seed; refuses jobs with more than
/// [`DEFAULT_CODEBOOK_BUDGET`] symbols.
pub fn sample_codebook(n: usize, m: usize, input_size: usize, seed: u64) -> Result<Codebook> {
    if n == 0 {
        return Err(CoreError::InvalidArgument(
            "block length n must be positive".into(),
        ));
    }
    if m < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "codebook needs at least 2 messages, got {m}"
        )));
    }
    if input_size < 2 || input_size > u8::MAX as usize {
        return Err(CoreError::InvalidArgument(format!(
            "input alphabet size {input_size} unsupported"
        )));
    }
    let symbols = (n as u64).checked_mul(m as u64);
    match symbols {
        Some(s) if s <= DEFAULT_CODEBOOK_BUDGET => {}
        _ => {
            return Err(CoreError::BudgetExceeded(format!(
                "codebook of {m} x {n} symbols exceeds the budget of {DEFAULT_CODEBOOK_BUDGET}"
            )))
        }
    }
    let mut rng = derive_rng(seed, 0, 0);
    let words = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| rng.gen_range(0..input_size) as u8)
                .collect()
        })
        .collect();
    Codebook::new(words, input_size)
}

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

fn output_space_size(output_size: usize, n: usize, budget: u64) -> Result<u64> {
    let total = (output_size as u64)
        .checked_pow(n as u32)
        .filter(|&t| t <= budget);
    total.ok_or_else(|| {
        CoreError::BudgetExceeded(format!(
            "|Y|^n = {output_size}^{n} exceeds the enumeration budget of {budget}"
        ))
    })
}

fn index_to_block(mut idx: u64, n: usize, output_size: usize) -> Vec<u8> {
    let mut y = vec![0u8; n];
    for slot in y.iter_mut() {
        *slot = (idx % output_size as u64) as u8;
        idx /= output_size as u64;
    }
    y
}

#[derive(Clone, Copy, Default)]
struct Accum {
    e1: f64,
    e2: f64,
    erasure: f64,
}

/// Exact event probabilities by full enumeration of the output space.
///
/// The decoder closure is called once per output block; its verdict charges
/// each message's probability mass to the right events:
/// `Pr{E1} = (1/M) sum over m of sum over y not decoded to m of P(y|x_m)`,
/// `Pr{E2}` restricted to blocks decoded to some other message, and
/// the erasure mass analogously. `gamma = Pr{E2} + e^{-nT} Pr{E1}`.
pub fn exact_error_probs<D>(
    cb: &Codebook,
    dec: D,
    ch: &Dmc,
    t: f64,
    budget: u64,
) -> Result<ErrorStats>
where
    D: Fn(&[u8]) -> Result<DecodeResult> + Sync,
{
    if t < 0.0 || !t.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold T = {t} must be nonnegative"
        )));
    }
    let n = cb.n();
    let total = output_space_size(ch.output_size(), n, budget)?;
    let m_count = cb.m() as f64;
    let chunk = 1u64 << 12;
    let folded: Result<Accum> = exec::chunked_fold(
        total,
        chunk,
        |range| {
            let mut acc = Accum::default();
            for idx in range {
                let y = index_to_block(idx, n, ch.output_size());
                let verdict = dec(&y)?.outcome;
                let mut mass_all = 0.0;
                let mut mass_winner = 0.0;
                for (m, x) in cb.words().iter().enumerate() {
                    let p = crate::channel::log_likelihood(ch, x, &y)?.exp();
                    mass_all += p;
                    if verdict == Outcome::Message(m) {
                        mass_winner = p;
                    }
                }
                let others = mass_all - mass_winner;
                match verdict {
                    Outcome::Message(_) => {
                        acc.e1 += others;
                        acc.e2 += others;
                    }
                    Outcome::Erasure => {
                        acc.e1 += mass_all;
                        acc.erasure += mass_all;
                    }
                }
            }
            Ok(acc)
        },
        |a, b| {
            let (a, b) = (a?, b?);
            Ok(Accum {
                e1: a.e1 + b.e1,
                e2: a.e2 + b.e2,
                erasure: a.erasure + b.erasure,
            })
        },
        Ok(Accum::default()),
    );
    let acc = folded?;
    // Summing up to |Y|^n * M exact masses drifts by a few ulps, which can
    // push a certain event slightly past 1; probabilities stay in [0, 1].
    let pr_e1 = (acc.e1 / m_count).clamp(0.0, 1.0);
    let pr_e2 = (acc.e2 / m_count).clamp(0.0, 1.0);
    let pr_erasure = (acc.erasure / m_count).clamp(0.0, 1.0);
    Ok(ErrorStats {
        pr_e1,
        pr_e2,
        pr_erasure,
        gamma: pr_e2 + (-(n as f64) * t).exp() * pr_e1,
        stderr: None,
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// Monte Carlo estimates of the event probabilities: each trial draws a
/// message uniformly, passes its codeword through the channel, and decodes.
/// Unbiased, with binomial standard errors; deterministic per seed and
/// independent of thread count.
pub fn mc_error_probs<D>(
    cb: &Codebook,
    dec: D,
    ch: &Dmc,
    t: f64,
    trials: u64,
    seed: u64,
) -> Result<ErrorStats>
where
    D: Fn(&[u8]) -> Result<DecodeResult> + Sync,
{
    if trials == 0 {
        return Err(CoreError::InvalidArgument(
            "trial count must be positive".into(),
        ));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold T = {t} must be nonnegative"
        )));
    }
    let n = cb.n();
    // Cumulative rows for inverse-CDF sampling.
    let cum: Vec<Vec<f64>> = (0..ch.input_size())
        .map(|x| {
            let mut acc = 0.0;
            ch.row(x)
                .iter()
                .map(|&p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();
    let chunk = 1u64 << 10;
    let folded: Result<(u64, u64, u64)> = exec::chunked_fold(
        trials,
        chunk,
        |range| {
            let mut e1 = 0u64;
            let mut e2 = 0u64;
            let mut erased = 0u64;
            for trial in range {
                let mut rng = derive_rng(seed, 1, trial);
                let m = rng.gen_range(0..cb.m());
                let x = cb.word(m);
                let y: Vec<u8> = x
                    .iter()
                    .map(|&sym| {
                        let u: f64 = rng.gen();
                        let row = &cum[sym as usize];
                        row.iter().position(|&c| u < c).unwrap_or(row.len() - 1) as u8
                    })
                    .collect();
                match dec(&y)?.outcome {
                    Outcome::Message(d) if d == m => {}
                    Outcome::Message(_) => {
                        e1 += 1;
                        e2 += 1;
                    }
                    Outcome::Erasure => {
                        e1 += 1;
                        erased += 1;
                    }
                }
            }
            Ok((e1, e2, erased))
        },
        |a, b| {
            let (a, b) = (a?, b?);
            Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2))
        },
        Ok((0, 0, 0)),
    );
    let (e1, e2, erased) = folded?;
    let tr = trials as f64;
    let pr_e1 = e1 as f64 / tr;
    let pr_e2 = e2 as f64 / tr;
    let pr_erasure = erased as f64 / tr;
    let se = |p: f64| (p * (1.0 - p) / tr).sqrt();
    Ok(ErrorStats {
        pr_e1,
        pr_e2,
        pr_erasure,
        gamma: pr_e2 + (-(n as f64) * t).exp() * pr_e1,
        stderr: Some(StdErrs {
            pr_e1: se(pr_e1),
            pr_e2: se(pr_e2),
            pr_erasure: se(pr_erasure),
        }),
    })
}

// ---------------------------------------------------------------------------
// Ensemble averaging
// ---------------------------------------------------------------------------

/// Exact ensemble run: samples `codebooks` random codebooks at rate `r`
/// (`M = ceil(e^{nR})`, at least 2), evaluates the chosen decoder against
/// every family grid channel, and reports per-channel averages plus the
/// codebook-averaged minimax ratio
/// `K_n = max over theta of gamma_theta / e^{-n [xi E1(theta) + T]}`.
///
/// The matched rule is re-matched to each grid channel; the universal rule
/// is built once from the family's `E1` table at `(r, t)` and `xi`.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_average(
    n: usize,
    r: f64,
    t: f64,
    fam: &ChannelFamily,
    kind: DecoderKind,
    xi: f64,
    codebooks: usize,
    seed: u64,
    grid: &GridSpec,
    budget: u64,
) -> Result<EnsembleReport> {
    if codebooks == 0 {
        return Err(CoreError::InvalidArgument(
            "ensemble needs at least one codebook".into(),
        ));
    }
    let m = message_count(n, r);
    let table = exponent_table(fam, r, t, grid)?;
    // e^{+n [xi E1 + T]} per grid channel (reciprocal of the target decay).
    let bound_inv: Vec<f64> = table
        .e1
        .iter()
        .map(|&e| ((n as f64) * (xi * e + t)).exp())
        .collect();
    let mut per_theta = vec![
        Accum {
            e1: 0.0,
            e2: 0.0,
            erasure: 0.0
        };
        fam.len()
    ];
    let mut gamma_sum = vec![0.0; fam.len()];
    let mut ratio_sum = vec![0.0; fam.len()];
    let mut kn_sum = 0.0;
    for c in 0..codebooks {
        let cb = sample_codebook(n, m, fam.input_size(), derive_seed(seed, c as u64))?;
        let mut kn = f64::NEG_INFINITY;
        for i in 0..fam.len() {
            let ch = fam.channel(i);
            let stats = match kind {
                DecoderKind::Forney => {
                    exact_error_probs(&cb, |y| forney_decode(&cb, y, ch, t), ch, t, budget)?
                }
                DecoderKind::Universal { variant } => {
                    let ctx = UniversalContext::new(fam, table.clone(), xi, t, n, variant)?;
                    exact_error_probs(&cb, |y| universal_decode(&cb, y, &ctx), ch, t, budget)?
                }
            };
            per_theta[i].e1 += stats.pr_e1;
            per_theta[i].e2 += stats.pr_e2;
            per_theta[i].erasure += stats.pr_erasure;
            gamma_sum[i] += stats.gamma;
            let ratio = stats.gamma * bound_inv[i];
            ratio_sum[i] += ratio;
            kn = kn.max(ratio);
        }
        kn_sum += kn;
    }
    let cbs = codebooks as f64;
    let per_theta: Vec<PerThetaStats> = (0..fam.len())
        .map(|i| PerThetaStats {
            theta: fam.label(i),
            pr_e1: per_theta[i].e1 / cbs,
            pr_e2: per_theta[i].e2 / cbs,
            pr_erasure: per_theta[i].erasure / cbs,
            gamma: gamma_sum[i] / cbs,
            ratio: ratio_sum[i] / cbs,
        })
        .collect();
    let l = fam.len() as f64;
    let avg = ErrorStats {
        pr_e1: per_theta.iter().map(|p| p.pr_e1).sum::<f64>() / l,
        pr_e2: per_theta.iter().map(|p| p.pr_e2).sum::<f64>() / l,
        pr_erasure: per_theta.iter().map(|p| p.pr_erasure).sum::<f64>() / l,
        gamma: per_theta.iter().map(|p| p.gamma).sum::<f64>() / l,
        stderr: None,
    };
    Ok(EnsembleReport {
        n,
        trials: codebooks,
        avg,
        kn_ratio: kn_sum / cbs,
        seed,
        per_theta,
    })
}

// ---------------------------------------------------------------------------
// Slope estimation
// ---------------------------------------------------------------------------

/// Least-squares slope of `-ln p` against `n`. Zero-probability points are
/// censored (excluded and counted) rather than fitted; at least two usable
/// points are required.
pub fn exponent_fit(points: &[(usize, f64)]) -> Result<SlopeFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, p)| p > 0.0)
        .map(|&(n, p)| (n as f64, -p.ln()))
        .collect();
    let censored = points.len() - usable.len();
    if usable.len() < 2 {
        return Err(CoreError::InvalidArgument(format!(
            "slope fit needs at least two usable points, got {}",
            usable.len()
        )));
    }
    let k = usable.len() as f64;
    let sx: f64 = usable.iter().map(|&(x, _)| x).sum();
    let sy: f64 = usable.iter().map(|&(_, y)| y).sum();
    let sxx: f64 = usable.iter().map(|&(x, _)| x * x).sum();
    let sxy: f64 = usable.iter().map(|&(x, y)| x * y).sum();
    let denom = k * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(CoreError::InvalidArgument(
            "slope fit needs at least two distinct block lengths".into(),
        ));
    }
    let slope = (k * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / k;
    let mse = usable
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / k;
    Ok(SlopeFit {
        slope,
        intercept,
        residual: mse.sqrt(),
        censored,
    })
}

// ---------------------------------------------------------------------------
// CSV series artifact
// ---------------------------------------------------------------------------

/// One row of the block-length probability series consumed by
/// [`exponent_fit`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SeriesRow {
    pub n: usize,
    pub pr_e1: f64,
    pub pr_e2: f64,
    pub pr_erasure: f64,
}

/// Writes the series CSV (`n,pr_e1,pr_e2,pr_erasure`) with optional `#`
/// comment lines for embedded configuration.
pub fn write_series_csv<W: Write>(mut w: W, comments: &[String], rows: &[SeriesRow]) -> Result<()> {
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

/// Reads the series CSV, skipping `#` comment lines.
pub fn read_series_csv<R: BufRead>(r: R) -> Result<Vec<SeriesRow>> {
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
