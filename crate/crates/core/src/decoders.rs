//! Decoding rules with an erasure option.
//!
//! [`forney_decode`] is the likelihood-ratio rule that is optimal when the
//! channel is known: decode message `m` exactly when
//! `ln P(y|x_m) - ln sum over m' != m of P(y|x_m') >= n T`.
//!
//! [`universal_decode`] replaces the likelihood with the channel-independent
//! score `f(x, y) = max over grid channels of
//! exp(n [xi E1(theta) + T]) P_theta(y|x)` and applies the same margin test.
//! It needs only the family grid, an `E1` table, and the fraction `xi`; with
//! `xi = xi*(R, T)` its exponents are at least `xi` times the optimal ones
//! for every channel in the family.
//!
//! [`variable_threshold_decode`] generalizes to a per-channel threshold map,
//! comparing `g(x, y) = max over theta of exp(n xi E1) P_theta` against the
//! sum over competitors of `h(x, y) = max over theta of
//! exp(n [xi E1 + T_theta]) P_theta`.
//!
//! Scores use log-domain arithmetic throughout; ties at the margin decode
//! the lowest qualifying message index, so all rules are deterministic.

use crate::channel::{joint_type, ChannelFamily, Codebook, Dmc};
use crate::exponents::ExponentTable;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Decoder verdict for one received block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Decoded message index (0-based).
    Message(usize),
    /// The decoder declined to decide.
    Erasure,
}

/// Decoder output: the verdict plus the per-message discriminant scores
/// (log-likelihoods for the matched rule, `ln f` or `ln g` for the
/// universal rules).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub outcome: Outcome,
    pub scores: Option<Vec<f64>>,
}

/// How the universal rule aggregates the competing messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Compare against the log-sum of all other messages' scores.
    SumOverOthers,
    /// Compare against the largest joint-type group: messages are grouped by
    /// their joint type with `y` (scores are constant on each group) and the
    /// competitor is `max over groups of [ln f + ln count]`. Within a factor
    /// `ln(number of groups)` of the sum, hence exponent-equivalent.
    MaxAlpha,
}

/// Log-sum-exp over message scores, skipping index `skip`.
fn lse_others(scores: &[f64], skip: usize) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for (i, &v) in scores.iter().enumerate() {
        if i != skip && v > m {
            m = v;
        }
    }
    if !m.is_finite() {
        return m;
    }
    let mut sum = 0.0;
    for (i, &v) in scores.iter().enumerate() {
        if i != skip {
            sum += (v - m).exp();
        }
    }
    m + sum.ln()
}

/// First message whose margin over the others reaches `n T`; erasure when
/// none does.
fn margin_rule(scores: &[f64], competitors: &[f64], nt: f64) -> Outcome {
    for (m, (&sc, &comp)) in scores.iter().zip(competitors.iter()).enumerate() {
        if sc - comp >= nt {
            return Outcome::Message(m);
        }
    }
    Outcome::Erasure
}

/// The likelihood-ratio erasure rule for a known channel at threshold
/// `t >= 0` (nats per symbol).
///
/// Scores are accumulated through each codeword's joint type with `y`, so
/// codewords of equal type get bit-identical log-likelihoods and ties
/// resolve exactly as in the universal rules (which score types the same
/// way).
pub fn forney_decode(cb: &Codebook, y: &[u8], ch: &Dmc, t: f64) -> Result<DecodeResult> {
    if t < 0.0 || !t.is_finite() {
        return Err(CoreError::InvalidArgument(format!(
            "threshold T = {t} must be nonnegative"
        )));
    }
    if y.len() != cb.n() {
        return Err(CoreError::LengthMismatch(format!(
            "received block has length {}, codebook has n = {}",
            y.len(),
            cb.n()
        )));
    }
    let ll: Vec<f64> = cb
        .words()
        .iter()
        .map(|x| joint_type(x, y, ch.input_size(), ch.output_size())?.log_likelihood(ch))
        .collect::<Result<_>>()?;
    let competitors: Vec<f64> = (0..ll.len()).map(|m| lse_others(&ll, m)).collect();
    let outcome = margin_rule(&ll, &competitors, cb.n() as f64 * t);
    Ok(DecodeResult {
        outcome,
        scores: Some(ll),
    })
}

/// Precomputed state for the universal rules: the family grid, its `E1`
/// table at the operating rate, the exponent fraction `xi`, the
/// fixed-threshold margin `t`, the block length, and the competitor
/// aggregation variant.
#[derive(Debug, Clone)]
pub struct UniversalContext<'a> {
    fam: &'a ChannelFamily,
    table: ExponentTable,
    xi: f64,
    /// Margin threshold of the fixed-threshold rule (ignored by
    /// [`variable_threshold_decode`], which takes its own map).
    t: f64,
    n: usize,
    variant: Variant,
    /// `n * xi * E1(theta_i)` per grid channel.
    base_weights: Vec<f64>,
}

impl<'a> UniversalContext<'a> {
    pub fn new(
        fam: &'a ChannelFamily,
        table: ExponentTable,
        xi: f64,
        t: f64,
        n: usize,
        variant: Variant,
    ) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(CoreError::InvalidArgument(format!(
                "xi = {xi} outside (0, 1]"
            )));
        }
        if t < 0.0 || !t.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "threshold T = {t} must be nonnegative"
            )));
        }
        if n == 0 {
            return Err(CoreError::InvalidArgument(
                "block length n must be positive".into(),
            ));
        }
        if table.e1.len() != fam.len() {
            return Err(CoreError::LengthMismatch(format!(
                "table covers {} grid points, family has {}",
                table.e1.len(),
                fam.len()
            )));
        }
        let base_weights = table
            .e1
            .iter()
            .map(|&e| n as f64 * xi * e)
            .collect();
        Ok(Self {
            fam,
            table,
            xi,
            t,
            n,
            variant,
            base_weights,
        })
    }

    pub fn family(&self) -> &ChannelFamily {
        self.fam
    }

    pub fn table(&self) -> &ExponentTable {
        &self.table
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn threshold(&self) -> f64 {
        self.t
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn check_block(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(CoreError::LengthMismatch(format!(
                "block length {len} differs from context n = {}",
                self.n
            )));
        }
        Ok(())
    }

    /// Requires a table whose threshold column is uniformly the context's
    /// fixed threshold (the fixed rule's weights are `n(xi E1 + T)` with the
    /// same `T` in the margin).
    fn check_fixed_table(&self) -> Result<()> {
        match self.table.uniform_threshold() {
            Some(t0) if t0 == self.t => Ok(()),
            _ => Err(CoreError::InvalidArgument(
                "fixed-threshold decoding needs an E1 table built at the rule threshold".into(),
            )),
        }
    }

    /// Canonical per-channel log-likelihoods of `(x, y)`, computed through
    /// the joint type so codewords of equal type get bit-identical scores.
    fn type_lls(&self, x: &[u8], y: &[u8]) -> Result<Vec<f64>> {
        let jt = joint_type(x, y, self.fam.input_size(), self.fam.output_size())?;
        (0..self.fam.len())
            .map(|i| jt.log_likelihood(self.fam.channel(i)))
            .collect()
    }

    /// `ln f(x, y)` given per-channel log-likelihoods.
    fn ln_f_from_lls(&self, lls: &[f64]) -> f64 {
        let nt = self.n as f64 * self.t;
        lls.iter()
            .zip(self.base_weights.iter())
            .map(|(&ll, &w)| w + nt + ll)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The channel-independent score `ln f(x, y) = max over grid channels of
/// n [xi E1(theta) + T] + ln P_theta(y|x)`.
pub fn universal_f(x: &[u8], y: &[u8], ctx: &UniversalContext) -> Result<f64> {
    ctx.check_block(x.len())?;
    ctx.check_block(y.len())?;
    ctx.check_fixed_table()?;
    Ok(ctx.ln_f_from_lls(&ctx.type_lls(x, y)?))
}

/// The universal erasure rule at the context's fixed threshold: decode `m`
/// exactly when `ln f(x_m, y)` exceeds the aggregated competitor score by
/// `n T`.
pub fn universal_decode(cb: &Codebook, y: &[u8], ctx: &UniversalContext) -> Result<DecodeResult> {
    ctx.check_block(cb.n())?;
    ctx.check_block(y.len())?;
    ctx.check_fixed_table()?;
    let mut ln_f = Vec::with_capacity(cb.m());
    let mut type_keys = Vec::with_capacity(cb.m());
    for x in cb.words() {
        let jt = joint_type(x, y, ctx.fam.input_size(), ctx.fam.output_size())?;
        let lls: Vec<f64> = (0..ctx.fam.len())
            .map(|i| jt.log_likelihood(ctx.fam.channel(i)))
            .collect::<Result<_>>()?;
        ln_f.push(ctx.ln_f_from_lls(&lls));
        type_keys.push(jt.key().to_vec());
    }
    let competitors: Vec<f64> = match ctx.variant {
        Variant::SumOverOthers => (0..cb.m()).map(|m| lse_others(&ln_f, m)).collect(),
        Variant::MaxAlpha => {
            // Group messages by joint type; scores are constant per group.
            let mut groups: Vec<(Vec<u32>, f64, usize)> = Vec::new();
            for (key, &v) in type_keys.iter().zip(ln_f.iter()) {
                match groups.iter_mut().find(|(k, _, _)| k == key) {
                    Some((_, _, count)) => *count += 1,
                    None => groups.push((key.clone(), v, 1)),
                }
            }
            (0..cb.m())
                .map(|m| {
                    groups
                        .iter()
                        .map(|(k, v, count)| {
                            let c = count - usize::from(k == &type_keys[m]);
                            if c == 0 {
                                f64::NEG_INFINITY
                            } else {
                                v + (c as f64).ln()
                            }
                        })
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        }
    };
    let outcome = margin_rule(&ln_f, &competitors, cb.n() as f64 * ctx.t);
    Ok(DecodeResult {
        outcome,
        scores: Some(ln_f),
    })
}

/// The variable-threshold universal rule: decode `m` exactly when
/// `g(x_m, y) >= sum over m' != m of h(x_m', y)` with
/// `ln g = max over theta of [n xi E1(R, T_theta, theta) + ln P_theta]` and
/// `ln h = ln g`'s maximand shifted by `n T_theta`. The map `t_map` must be
/// the one the context's table was built with.
pub fn variable_threshold_decode(
    cb: &Codebook,
    y: &[u8],
    ctx: &UniversalContext,
    t_map: &[f64],
) -> Result<DecodeResult> {
    ctx.check_block(cb.n())?;
    ctx.check_block(y.len())?;
    if t_map.len() != ctx.fam.len() {
        return Err(CoreError::LengthMismatch(format!(
            "threshold map covers {} grid points, family has {}",
            t_map.len(),
            ctx.fam.len()
        )));
    }
    if t_map != ctx.table.thresholds.as_slice() {
        return Err(CoreError::InvalidArgument(
            "threshold map differs from the one the E1 table was built with".into(),
        ));
    }
    let n = cb.n() as f64;
    let mut ln_g = Vec::with_capacity(cb.m());
    let mut ln_h = Vec::with_capacity(cb.m());
    for x in cb.words() {
        let lls = ctx.type_lls(x, y)?;
        let mut g = f64::NEG_INFINITY;
        let mut h = f64::NEG_INFINITY;
        for (i, &ll) in lls.iter().enumerate() {
            let base = ctx.base_weights[i] + ll;
            g = g.max(base);
            h = h.max(base + n * t_map[i]);
        }
        ln_g.push(g);
        ln_h.push(h);
    }
    let competitors: Vec<f64> = (0..cb.m()).map(|m| lse_others(&ln_h, m)).collect();
    let outcome = margin_rule(&ln_g, &competitors, 0.0);
    Ok(DecodeResult {
        outcome,
        scores: Some(ln_g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{message_count, Codebook};
    use crate::exponents::{exponent_table, exponent_table_variable, GridSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn repetition_codebook(n: usize) -> Codebook {
        Codebook::new(vec![vec![0u8; n], vec![1u8; n]], 2).unwrap()
    }

    #[test]
    fn matched_rule_hand_computed() {
        let ch = Dmc::bsc(0.1).unwrap();
        let cb = repetition_codebook(1);
        // y = 0: margin of message 0 is ln(0.9/0.1) = ln 9 > 0.
        let res = forney_decode(&cb, &[0], &ch, 0.0).unwrap();
        assert_eq!(res.outcome, Outcome::Message(0));
        let scores = res.scores.unwrap();
        assert_abs_diff_eq!(scores[0], 0.9f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(scores[1], 0.1f64.ln(), epsilon = 1e-12);
        // Margin ln 9 = 2.197 < n T = 3: erase.
        let res = forney_decode(&cb, &[0], &ch, 3.0).unwrap();
        assert_eq!(res.outcome, Outcome::Erasure);
        let res = forney_decode(&cb, &[1], &ch, 0.0).unwrap();
        assert_eq!(res.outcome, Outcome::Message(1));
    }

    #[test]
    fn matched_rule_tie_prefers_lowest_index() {
        // A useless channel scores every message equally; at T = 0 with two
        // messages the margin is exactly 0 for both.
        let ch = Dmc::bsc(0.5).unwrap();
        let cb = repetition_codebook(3);
        let res = forney_decode(&cb, &[0, 1, 0], &ch, 0.0).unwrap();
        assert_eq!(res.outcome, Outcome::Message(0));
    }

    #[test]
    fn matched_rule_validates_input() {
        let ch = Dmc::bsc(0.1).unwrap();
        let cb = repetition_codebook(2);
        assert!(forney_decode(&cb, &[0], &ch, 0.1).is_err());
        assert!(forney_decode(&cb, &[0, 1], &ch, -0.1).is_err());
        assert!(forney_decode(&cb, &[0, 5], &ch, 0.1).is_err());
    }

    fn fixture_ctx(fam: &ChannelFamily, xi: f64, t: f64, n: usize) -> UniversalContext<'_> {
        let table = exponent_table(fam, 0.1, t, &GridSpec::default()).unwrap();
        UniversalContext::new(fam, table, xi, t, n, Variant::SumOverOthers).unwrap()
    }

    #[test]
    fn universal_score_fixture() {
        // Frozen from the reference implementation: ten-point grid, R = 0.1,
        // T = 0.05, xi = 0.5, n = 4, all-zero codeword and received block.
        let thetas: Vec<f64> = (1..=10).map(|i| f64::from(i) * 0.05).collect();
        let fam = ChannelFamily::bsc_grid(&thetas).unwrap();
        let ctx = fixture_ctx(&fam, 0.5, 0.05, 4);
        let v = universal_f(&[0; 4], &[0; 4], &ctx).unwrap();
        assert_abs_diff_eq!(v, 0.408501479499, epsilon = 1e-6);
    }

    #[test]
    fn universal_score_depends_only_on_joint_type() {
        let fam = ChannelFamily::bsc_grid(&[0.05, 0.1, 0.2, 0.3]).unwrap();
        let ctx = fixture_ctx(&fam, 0.7, 0.02, 4);
        let y = [0u8, 1, 0, 1];
        // Same joint type with y, different codewords.
        let a = universal_f(&[0, 0, 1, 1], &y, &ctx).unwrap();
        let b = universal_f(&[1, 1, 0, 0], &y, &ctx).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn context_validation() {
        let fam = ChannelFamily::bsc_grid(&[0.1, 0.2]).unwrap();
        let table = exponent_table(&fam, 0.1, 0.05, &GridSpec::default()).unwrap();
        assert!(UniversalContext::new(&fam, table.clone(), 0.0, 0.05, 4, Variant::MaxAlpha).is_err());
        assert!(UniversalContext::new(&fam, table.clone(), 1.5, 0.05, 4, Variant::MaxAlpha).is_err());
        assert!(UniversalContext::new(&fam, table.clone(), 0.5, 0.05, 0, Variant::MaxAlpha).is_err());
        let short = ExponentTable {
            r: 0.1,
            thresholds: vec![0.05],
            labels: vec![0.1],
            e1: vec![0.1],
        };
        assert!(UniversalContext::new(&fam, short, 0.5, 0.05, 4, Variant::MaxAlpha).is_err());
        // Threshold mismatch between rule and table is rejected at decode.
        let ctx = UniversalContext::new(&fam, table, 0.5, 0.07, 4, Variant::SumOverOthers).unwrap();
        assert!(universal_f(&[0; 4], &[0; 4], &ctx).is_err());
    }

    /// Enumerates all received blocks of length `n` over a binary output.
    fn all_blocks(n: usize) -> Vec<Vec<u8>> {
        (0..1usize << n)
            .map(|bits| (0..n).map(|i| ((bits >> i) & 1) as u8).collect())
            .collect()
    }

    #[test]
    fn singleton_family_reduces_to_matched_rule() {
        // With one grid channel and xi = 1 the universal score is the
        // log-likelihood plus a constant, so both rules decide identically.
        let theta = 0.1;
        let fam = ChannelFamily::bsc_grid(&[theta]).unwrap();
        let ch = Dmc::bsc(theta).unwrap();
        let t = 0.05;
        let ctx = fixture_ctx(&fam, 1.0, t, 3);
        let cb = Codebook::new(vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 1, 0]], 2).unwrap();
        for y in all_blocks(3) {
            let matched = forney_decode(&cb, &y, &ch, t).unwrap();
            let universal = universal_decode(&cb, &y, &ctx).unwrap();
            assert_eq!(matched.outcome, universal.outcome, "y = {y:?}");
        }
    }

    #[test]
    fn max_alpha_decodes_whenever_sum_does() {
        let fam = ChannelFamily::bsc_grid(&[0.05, 0.1, 0.2, 0.35]).unwrap();
        let table = exponent_table(&fam, 0.15, 0.03, &GridSpec::default()).unwrap();
        let sum_ctx =
            UniversalContext::new(&fam, table.clone(), 0.8, 0.03, 4, Variant::SumOverOthers)
                .unwrap();
        let max_ctx =
            UniversalContext::new(&fam, table, 0.8, 0.03, 4, Variant::MaxAlpha).unwrap();
        let cb = Codebook::new(
            vec![vec![0, 0, 0, 0], vec![0, 0, 1, 1], vec![1, 0, 1, 0], vec![1, 1, 1, 1]],
            2,
        )
        .unwrap();
        let mut sum_decodes = 0;
        let mut max_decodes = 0;
        for y in all_blocks(4) {
            let s = universal_decode(&cb, &y, &sum_ctx).unwrap().outcome;
            let m = universal_decode(&cb, &y, &max_ctx).unwrap().outcome;
            // The grouped-max competitor is never larger than the sum, so
            // the max-alpha rule's decoding region contains the sum rule's.
            if s != Outcome::Erasure {
                sum_decodes += 1;
                assert_ne!(m, Outcome::Erasure, "y = {y:?}");
            }
            if m != Outcome::Erasure {
                max_decodes += 1;
            }
        }
        assert!(max_decodes >= sum_decodes);
        assert!(sum_decodes > 0);
    }

    #[test]
    fn raising_threshold_only_adds_erasures() {
        let ch = Dmc::bsc(0.15).unwrap();
        let cb = Codebook::new(vec![vec![0, 0, 0, 0], vec![1, 1, 0, 1], vec![0, 1, 1, 0]], 2)
            .unwrap();
        for y in all_blocks(4) {
            let hi = forney_decode(&cb, &y, &ch, 0.2).unwrap().outcome;
            let lo = forney_decode(&cb, &y, &ch, 0.05).unwrap().outcome;
            if let Outcome::Message(m) = hi {
                assert_eq!(lo, Outcome::Message(m), "y = {y:?}");
            }
        }
    }

    #[test]
    fn constant_map_matches_fixed_threshold_rule() {
        let fam = ChannelFamily::bsc_grid(&[0.05, 0.12, 0.25]).unwrap();
        let t = 0.04;
        let g = GridSpec::default();
        let table = exponent_table(&fam, 0.1, t, &g).unwrap();
        let ctx =
            UniversalContext::new(&fam, table, 0.6, t, 4, Variant::SumOverOthers).unwrap();
        let cb = Codebook::new(vec![vec![0, 0, 1, 0], vec![1, 0, 0, 1], vec![1, 1, 1, 0]], 2)
            .unwrap();
        let t_map = vec![t; fam.len()];
        for y in all_blocks(4) {
            let fixed = universal_decode(&cb, &y, &ctx).unwrap().outcome;
            let varia = variable_threshold_decode(&cb, &y, &ctx, &t_map)
                .unwrap()
                .outcome;
            assert_eq!(fixed, varia, "y = {y:?}");
        }
    }

    #[test]
    fn variable_threshold_validates_map() {
        let fam = ChannelFamily::bsc_grid(&[0.1, 0.2]).unwrap();
        let g = GridSpec::default();
        let t_map = [0.02, 0.08];
        let table = exponent_table_variable(&fam, 0.1, &t_map, &g).unwrap();
        let ctx =
            UniversalContext::new(&fam, table, 0.5, 0.0, 2, Variant::SumOverOthers).unwrap();
        let cb = repetition_codebook(2);
        assert!(variable_threshold_decode(&cb, &[0, 1], &ctx, &t_map).is_ok());
        assert!(variable_threshold_decode(&cb, &[0, 1], &ctx, &[0.02]).is_err());
        assert!(variable_threshold_decode(&cb, &[0, 1], &ctx, &[0.03, 0.08]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Whenever the matched rule decodes, the winner carries the
        /// strictly largest likelihood (margin >= 0 forces dominance).
        #[test]
        fn decoded_message_has_maximal_likelihood(
            theta in 0.05f64..0.45,
            t in 0.0f64..0.3,
            y_bits in 0usize..64,
        ) {
            let n = 6;
            let ch = Dmc::bsc(theta).unwrap();
            let words = vec![
                vec![0, 0, 0, 0, 0, 0],
                vec![0, 1, 0, 1, 0, 1],
                vec![1, 1, 0, 0, 1, 1],
                vec![1, 1, 1, 1, 1, 1],
            ];
            let m = message_count(n, 0.2);
            prop_assert!(m <= words.len());
            let cb = Codebook::new(words[..m.max(2)].to_vec(), 2).unwrap();
            let y: Vec<u8> = (0..n).map(|i| ((y_bits >> i) & 1) as u8).collect();
            let res = forney_decode(&cb, &y, &ch, t).unwrap();
            let scores = res.scores.unwrap();
            if let Outcome::Message(m) = res.outcome {
                for (i, &s) in scores.iter().enumerate() {
                    if i != m {
                        prop_assert!(scores[m] >= s - 1e-12);
                    }
                }
            }
        }
    }
}
