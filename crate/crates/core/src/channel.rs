//! Channels, channel families, joint types, and information measures.
//!
//! A [`Dmc`] is a discrete memoryless channel given by its single-letter
//! transition matrix `P(y|x)`. A [`ChannelFamily`] is a finite indexed set of
//! candidate channels (the search grid of an unknown parameter). A
//! [`JointType`] is the empirical joint distribution of an input/output
//! vector pair, the sufficient statistic for every likelihood in a family.

use crate::tol::{DIST_SUM_TOL, LOG_ZERO, ROW_SUM_TOL};
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A discrete memoryless channel: transition probabilities `P(y|x)` with one
/// row per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    probs: Vec<Vec<f64>>,
    log_probs: Vec<Vec<f64>>,
}

impl Dmc {
    /// Builds a channel from its transition matrix, validating that every
    /// entry is a probability and every row sums to 1 within
    /// [`ROW_SUM_TOL`]. Both alphabets must have at least two symbols.
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(CoreError::InvalidChannel(format!(
                "input alphabet must have at least 2 symbols, got {}",
                probs.len()
            )));
        }
        let out = probs[0].len();
        if out < 2 {
            return Err(CoreError::InvalidChannel(format!(
                "output alphabet must have at least 2 symbols, got {out}"
            )));
        }
        for (x, row) in probs.iter().enumerate() {
            if row.len() != out {
                return Err(CoreError::InvalidChannel(format!(
                    "row {x} has {} entries, expected {out}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(CoreError::InvalidChannel(format!(
                        "P(y={y}|x={x}) = {p} is not a probability"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(CoreError::InvalidChannel(format!(
                    "row {x} sums to {sum}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
        }
        let log_probs = probs
            .iter()
            .map(|row| row.iter().map(|&p| safe_ln(p)).collect())
            .collect();
        Ok(Self { probs, log_probs })
    }

    /// Binary symmetric channel with crossover probability `theta` in
    /// `(0, 1/2]`.
    pub fn bsc(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 0.5) {
            return Err(CoreError::InvalidChannel(format!(
                "BSC crossover must lie in (0, 1/2], got {theta}"
            )));
        }
        Self::new(vec![vec![1.0 - theta, theta], vec![theta, 1.0 - theta]])
    }

    /// Number of input symbols `|X|`.
    pub fn input_size(&self) -> usize {
        self.probs.len()
    }

    /// Number of output symbols `|Y|`.
    pub fn output_size(&self) -> usize {
        self.probs[0].len()
    }

    /// Transition probability `P(y|x)`.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x][y]
    }

    /// `ln P(y|x)`, with zero probabilities mapped to [`LOG_ZERO`].
    pub fn log_prob(&self, x: usize, y: usize) -> f64 {
        self.log_probs[x][y]
    }

    /// Row `P(.|x)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x]
    }

    /// Reads a channel from a JSON spec file
    /// `{"input_alphabet": n, "output_alphabet": m, "rows": [[..], ..]}`.
    pub fn from_spec_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: ChannelSpec =
            serde_json::from_str(&text).map_err(|e| CoreError::Format(e.to_string()))?;
        spec.build()
    }
}

/// `ln p` with `ln 0` replaced by the finite sentinel [`LOG_ZERO`].
pub fn safe_ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        LOG_ZERO
    }
}

/// JSON schema of a single channel spec file.
#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub input_alphabet: usize,
    pub output_alphabet: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelSpec {
    /// Validates the declared alphabet sizes against the matrix and builds
    /// the channel.
    pub fn build(&self) -> Result<Dmc> {
        if self.rows.len() != self.input_alphabet
            || self.rows.iter().any(|r| r.len() != self.output_alphabet)
        {
            return Err(CoreError::Format(format!(
                "declared alphabets {}x{} do not match the matrix shape",
                self.input_alphabet, self.output_alphabet
            )));
        }
        Dmc::new(self.rows.clone())
    }

    /// Spec view of an existing channel.
    pub fn of(ch: &Dmc) -> Self {
        Self {
            input_alphabet: ch.input_size(),
            output_alphabet: ch.output_size(),
            rows: ch.probs.clone(),
        }
    }
}

/// Kind of a channel family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Binary symmetric channels indexed by crossover probability.
    Bsc,
    /// An explicit list of channels indexed by position.
    GeneralGrid,
}

/// A finite family `{P_theta}` of candidate channels with an ordered
/// parameter grid.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    kind: FamilyKind,
    labels: Vec<f64>,
    channels: Vec<Dmc>,
}

impl ChannelFamily {
    /// BSC family over the given crossover grid. Points must be distinct and
    /// lie in `(0, 1/2]` (zero and one are excluded to avoid degenerate
    /// likelihoods; crossovers above 1/2 are covered by relabeling the
    /// output).
    pub fn bsc_grid(thetas: &[f64]) -> Result<Self> {
        if thetas.is_empty() {
            return Err(CoreError::InvalidChannel("family grid is empty".into()));
        }
        let mut seen = thetas.to_vec();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::InvalidChannel(
                "family grid points must be distinct".into(),
            ));
        }
        let channels = thetas.iter().map(|&t| Dmc::bsc(t)).collect::<Result<_>>()?;
        Ok(Self {
            kind: FamilyKind::Bsc,
            labels: thetas.to_vec(),
            channels,
        })
    }

    /// The canonical BSC grid `{0.01, 0.02, ..., 0.50}`.
    pub fn bsc_canonical() -> Self {
        let thetas: Vec<f64> = (1..=50).map(|i| f64::from(i) / 100.0).collect();
        Self::bsc_grid(&thetas).expect("canonical grid is valid")
    }

    /// General family from an explicit channel list; all channels must share
    /// both alphabets. Grid labels are the list indices.
    pub fn general(channels: Vec<Dmc>) -> Result<Self> {
        if channels.is_empty() {
            return Err(CoreError::InvalidChannel("family grid is empty".into()));
        }
        let (ix, ox) = (channels[0].input_size(), channels[0].output_size());
        if channels
            .iter()
            .any(|c| c.input_size() != ix || c.output_size() != ox)
        {
            return Err(CoreError::InvalidChannel(
                "all channels in a family must share alphabets".into(),
            ));
        }
        let labels = (0..channels.len()).map(|i| i as f64).collect();
        Ok(Self {
            kind: FamilyKind::GeneralGrid,
            labels,
            channels,
        })
    }

    /// Reads a family from a JSON spec file: either
    /// `{"kind": "bsc", "grid": [0.05, ...]}` or
    /// `{"kind": "general", "channels": [<channel spec>, ...]}`.
    pub fn from_spec_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let spec: FamilySpec =
            serde_json::from_str(&text).map_err(|e| CoreError::Format(e.to_string()))?;
        spec.build()
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Parameter label of grid point `i` (crossover probability for BSC,
    /// list index for general grids).
    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    /// Channel at grid point `i`.
    pub fn channel(&self, i: usize) -> &Dmc {
        &self.channels[i]
    }

    /// Iterates `(label, channel)` pairs in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &Dmc)> {
        self.labels.iter().copied().zip(self.channels.iter())
    }

    /// Shared input alphabet size.
    pub fn input_size(&self) -> usize {
        self.channels[0].input_size()
    }

    /// Shared output alphabet size.
    pub fn output_size(&self) -> usize {
        self.channels[0].output_size()
    }
}

/// JSON schema of a family spec file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FamilySpec {
    Bsc { grid: Vec<f64> },
    General { channels: Vec<ChannelSpec> },
}

impl FamilySpec {
    pub fn build(&self) -> Result<ChannelFamily> {
        match self {
            FamilySpec::Bsc { grid } => ChannelFamily::bsc_grid(grid),
            FamilySpec::General { channels } => {
                let chans = channels.iter().map(ChannelSpec::build).collect::<Result<_>>()?;
                ChannelFamily::general(chans)
            }
        }
    }
}

/// Empirical joint type of an input/output vector pair: integer counts per
/// `(x, y)` cell, summing to the block length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointType {
    counts: Vec<u32>,
    input_size: usize,
    output_size: usize,
    n: usize,
}

impl JointType {
    /// Count of positions with input symbol `x` and output symbol `y`.
    pub fn count(&self, x: usize, y: usize) -> u32 {
        self.counts[x * self.output_size + y]
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Flat counts in row-major `(x, y)` order, usable as a hash key.
    pub fn key(&self) -> &[u32] {
        &self.counts
    }

    /// Log-likelihood of the pair under `ch`, computed from the counts:
    /// `sum over (x,y) of count * ln P(y|x)`. Equals the per-symbol product
    /// because likelihoods are linear functionals of the type.
    pub fn log_likelihood(&self, ch: &Dmc) -> Result<f64> {
        if ch.input_size() != self.input_size || ch.output_size() != self.output_size {
            return Err(CoreError::LengthMismatch(format!(
                "type is {}x{} but channel is {}x{}",
                self.input_size,
                self.output_size,
                ch.input_size(),
                ch.output_size()
            )));
        }
        let mut total = 0.0;
        for x in 0..self.input_size {
            for y in 0..self.output_size {
                let c = self.count(x, y);
                if c > 0 {
                    let lp = ch.log_prob(x, y);
                    if lp <= LOG_ZERO {
                        return Ok(LOG_ZERO);
                    }
                    total += f64::from(c) * lp;
                }
            }
        }
        Ok(total)
    }

    /// Empirical output distribution (the y-marginal of the type).
    pub fn output_marginal(&self) -> Vec<f64> {
        let mut py = vec![0.0; self.output_size];
        for x in 0..self.input_size {
            for (y, p) in py.iter_mut().enumerate() {
                *p += f64::from(self.count(x, y));
            }
        }
        let n = self.n.max(1) as f64;
        for p in &mut py {
            *p /= n;
        }
        py
    }
}

/// Computes the joint type of `(x, y)` over the given alphabets.
pub fn joint_type(x: &[u8], y: &[u8], input_size: usize, output_size: usize) -> Result<JointType> {
    if x.len() != y.len() {
        return Err(CoreError::LengthMismatch(format!(
            "input length {} vs output length {}",
            x.len(),
            y.len()
        )));
    }
    let mut counts = vec![0u32; input_size * output_size];
    for (&a, &b) in x.iter().zip(y.iter()) {
        let (a, b) = (a as usize, b as usize);
        if a >= input_size {
            return Err(CoreError::SymbolOutOfRange(format!(
                "input symbol {a} with |X| = {input_size}"
            )));
        }
        if b >= output_size {
            return Err(CoreError::SymbolOutOfRange(format!(
                "output symbol {b} with |Y| = {output_size}"
            )));
        }
        counts[a * output_size + b] += 1;
    }
    Ok(JointType {
        counts,
        input_size,
        output_size,
        n: x.len(),
    })
}

/// Log-likelihood `ln P(y|x) = sum over i of ln P(y_i|x_i)` in nats. Returns
/// [`LOG_ZERO`] when any factor is zero. Empty vectors give 0 (empty
/// product).
pub fn log_likelihood(ch: &Dmc, x: &[u8], y: &[u8]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CoreError::LengthMismatch(format!(
            "input length {} vs output length {}",
            x.len(),
            y.len()
        )));
    }
    let mut total = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        let (a, b) = (a as usize, b as usize);
        if a >= ch.input_size() {
            return Err(CoreError::SymbolOutOfRange(format!(
                "input symbol {a} with |X| = {}",
                ch.input_size()
            )));
        }
        if b >= ch.output_size() {
            return Err(CoreError::SymbolOutOfRange(format!(
                "output symbol {b} with |Y| = {}",
                ch.output_size()
            )));
        }
        let lp = ch.log_prob(a, b);
        if lp <= LOG_ZERO {
            return Ok(LOG_ZERO);
        }
        total += lp;
    }
    Ok(total)
}

/// Shannon entropy of a distribution in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &v in p {
        if v < 0.0 || !v.is_finite() {
            return Err(CoreError::InvalidDistribution(format!(
                "negative or non-finite entry {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > DIST_SUM_TOL {
        return Err(CoreError::InvalidDistribution(format!(
            "entries sum to {sum}, expected 1 within {DIST_SUM_TOL:e}"
        )));
    }
    Ok(p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum())
}

/// Binary entropy `h2(u) = -u ln u - (1-u) ln(1-u)` in nats.
pub fn binary_entropy(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::InvalidArgument(format!(
            "binary entropy argument {u} outside [0, 1]"
        )));
    }
    let mut h = 0.0;
    if u > 0.0 {
        h -= u * u.ln();
    }
    if u < 1.0 {
        h -= (1.0 - u) * (1.0 - u).ln();
    }
    Ok(h)
}

/// An explicit block code: `M` codewords of length `n` over the input
/// alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    words: Vec<Vec<u8>>,
}

impl Codebook {
    /// Builds a codebook, requiring at least two messages (erasure decoding
    /// is degenerate otherwise), equal word lengths, and in-range symbols.
    pub fn new(words: Vec<Vec<u8>>, input_size: usize) -> Result<Self> {
        if words.len() < 2 {
            return Err(CoreError::InvalidArgument(format!(
                "a codebook needs at least 2 messages, got {}",
                words.len()
            )));
        }
        let n = words[0].len();
        for (m, w) in words.iter().enumerate() {
            if w.len() != n {
                return Err(CoreError::LengthMismatch(format!(
                    "codeword {m} has length {}, expected {n}",
                    w.len()
                )));
            }
            if let Some(&s) = w.iter().find(|&&s| (s as usize) >= input_size) {
                return Err(CoreError::SymbolOutOfRange(format!(
                    "codeword {m} contains symbol {s} with |X| = {input_size}"
                )));
            }
        }
        Ok(Self { n, words })
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of messages `M`.
    pub fn m(&self) -> usize {
        self.words.len()
    }

    /// Codeword of message `m` (0-based).
    pub fn word(&self, m: usize) -> &[u8] {
        &self.words[m]
    }

    /// All codewords in message order.
    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }
}

/// Message count for rate `R` nats at block length `n`: `ceil(e^(nR))`,
/// floored at 2.
pub fn message_count(n: usize, rate: f64) -> usize {
    let m = (rate * n as f64).exp().ceil();
    (m as usize).max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bsc_matrix_is_doubly_stochastic() {
        let ch = Dmc::bsc(0.1).unwrap();
        assert_eq!(ch.row(0), &[0.9, 0.1]);
        assert_eq!(ch.row(1), &[0.1, 0.9]);
        for y in 0..2 {
            let col: f64 = (0..2).map(|x| ch.prob(x, y)).sum();
            assert_abs_diff_eq!(col, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn dmc_rejects_bad_rows() {
        assert!(Dmc::new(vec![vec![0.6, 0.3], vec![0.5, 0.5]]).is_err());
        assert!(Dmc::new(vec![vec![1.1, -0.1], vec![0.5, 0.5]]).is_err());
        assert!(Dmc::new(vec![vec![1.0], vec![1.0]]).is_err());
        assert!(Dmc::bsc(0.0).is_err());
        assert!(Dmc::bsc(0.6).is_err());
    }

    #[test]
    fn log_likelihood_two_matches() {
        let ch = Dmc::bsc(0.1).unwrap();
        let v = log_likelihood(&ch, &[0, 0], &[0, 0]).unwrap();
        assert_abs_diff_eq!(v, 2.0 * 0.9f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_likelihood_empty_product_is_zero() {
        let ch = Dmc::bsc(0.1).unwrap();
        assert_eq!(log_likelihood(&ch, &[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn log_likelihood_mixed_symbols() {
        // One crossover and two matches, summed factor by factor.
        let ch = Dmc::bsc(0.1).unwrap();
        let v = log_likelihood(&ch, &[0, 1, 0], &[1, 1, 0]).unwrap();
        let expected = 0.1f64.ln() + 0.9f64.ln() + 0.9f64.ln();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
    }

    #[test]
    fn log_likelihood_zero_factor_hits_sentinel() {
        let ch = Dmc::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let v = log_likelihood(&ch, &[0], &[1]).unwrap();
        assert_eq!(v, LOG_ZERO);
    }

    #[test]
    fn log_likelihood_validates_inputs() {
        let ch = Dmc::bsc(0.1).unwrap();
        assert!(matches!(
            log_likelihood(&ch, &[0, 0], &[0]),
            Err(CoreError::LengthMismatch(_))
        ));
        assert!(matches!(
            log_likelihood(&ch, &[2], &[0]),
            Err(CoreError::SymbolOutOfRange(_))
        ));
    }

    #[test]
    fn joint_type_counts_by_definition() {
        let t = joint_type(&[0, 1], &[1, 1], 2, 2).unwrap();
        assert_eq!(t.count(0, 1), 1);
        assert_eq!(t.count(1, 1), 1);
        assert_eq!(t.count(0, 0), 0);
        assert_eq!(t.n(), 2);

        let t = joint_type(&[0, 0, 0], &[0, 0, 0], 2, 2).unwrap();
        assert_eq!(t.count(0, 0), 3);
        assert_eq!(t.key().iter().sum::<u32>(), 3);
    }

    #[test]
    fn type_likelihood_equals_per_symbol_likelihood() {
        let ch = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3]]).unwrap();
        let x = [0u8, 1, 1, 0, 1, 0, 0, 1, 1, 0];
        let y = [0u8, 2, 1, 1, 0, 0, 2, 1, 1, 0];
        let direct = log_likelihood(&ch, &x, &y).unwrap();
        let via_type = joint_type(&x, &y, 2, 3)
            .unwrap()
            .log_likelihood(&ch)
            .unwrap();
        assert_abs_diff_eq!(direct, via_type, epsilon = 1e-10);
    }

    #[test]
    fn distinct_type_count_within_polynomial_bound() {
        // All pairs of binary vectors of length n yield at most
        // (n+1)^(|X||Y|) distinct joint types.
        let n = 6usize;
        let mut seen = std::collections::HashSet::new();
        for xv in 0..(1u32 << n) {
            for yv in 0..(1u32 << n) {
                let x: Vec<u8> = (0..n).map(|i| ((xv >> i) & 1) as u8).collect();
                let y: Vec<u8> = (0..n).map(|i| ((yv >> i) & 1) as u8).collect();
                let t = joint_type(&x, &y, 2, 2).unwrap();
                seen.insert(t.key().to_vec());
            }
        }
        let bound = (n as u64 + 1).pow(4);
        assert!(
            (seen.len() as u64) <= bound,
            "{} types exceeds ({}+1)^4 = {}",
            seen.len(),
            n,
            bound
        );
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 2.0f64.ln(), epsilon = 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            entropy(&[0.25, 0.25, 0.25, 0.25]).unwrap(),
            4.0f64.ln(),
            epsilon = 1e-15
        );
        assert!(entropy(&[0.5, 0.6]).is_err());
        assert!(entropy(&[-0.1, 1.1]).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn codebook_validation() {
        assert!(Codebook::new(vec![vec![0, 1]], 2).is_err());
        assert!(Codebook::new(vec![vec![0, 1], vec![0]], 2).is_err());
        assert!(Codebook::new(vec![vec![0, 2], vec![0, 1]], 2).is_err());
        let cb = Codebook::new(vec![vec![0, 1], vec![1, 1]], 2).unwrap();
        assert_eq!(cb.n(), 2);
        assert_eq!(cb.m(), 2);
    }

    #[test]
    fn message_count_rounds_up_with_floor_two() {
        assert_eq!(message_count(10, 0.0), 2);
        assert_eq!(message_count(16, 0.1), 5); // e^1.6 = 4.953
        assert_eq!(message_count(10, 0.2), 8); // e^2 = 7.389
    }

    #[test]
    fn family_grid_validation() {
        assert!(ChannelFamily::bsc_grid(&[]).is_err());
        assert!(ChannelFamily::bsc_grid(&[0.1, 0.1]).is_err());
        let fam = ChannelFamily::bsc_canonical();
        assert_eq!(fam.len(), 50);
        assert_abs_diff_eq!(fam.label(0), 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(fam.label(49), 0.50, epsilon = 1e-15);
    }

    #[test]
    fn spec_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ch_path = dir.path().join("ch.json");
        let ch = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.6, 0.3]]).unwrap();
        let spec = ChannelSpec::of(&ch);
        std::fs::write(&ch_path, serde_json::to_string(&spec).unwrap()).unwrap();
        let back = Dmc::from_spec_file(&ch_path).unwrap();
        assert_eq!(back, ch);

        let fam_path = dir.path().join("fam.json");
        std::fs::write(&fam_path, r#"{"kind":"bsc","grid":[0.05,0.1,0.2]}"#).unwrap();
        let fam = ChannelFamily::from_spec_file(&fam_path).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam.kind(), FamilyKind::Bsc);

        let gen_path = dir.path().join("gen.json");
        let gen_spec = serde_json::json!({
            "kind": "general",
            "channels": [
                {"input_alphabet": 2, "output_alphabet": 2, "rows": [[0.9, 0.1], [0.1, 0.9]]},
                {"input_alphabet": 2, "output_alphabet": 2, "rows": [[0.8, 0.2], [0.2, 0.8]]}
            ]
        });
        std::fs::write(&gen_path, gen_spec.to_string()).unwrap();
        let gen = ChannelFamily::from_spec_file(&gen_path).unwrap();
        assert_eq!(gen.len(), 2);
        assert_eq!(gen.kind(), FamilyKind::GeneralGrid);
    }
}
