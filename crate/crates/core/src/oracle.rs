//! Brute-force reference implementations.
//!
//! Every closed-form inner optimization in [`crate::exponents`] is checked
//! against a direct search here: simplex-grid scans with deterministic
//! hill-climb refinement for the distribution optimizations, full codeword
//! enumeration for the average moment, and a per-output-block assignment
//! oracle for decision-rule optimality. These are deliberately slow and
//! simple; they exist to be obviously correct, not fast.

use crate::channel::{safe_ln, Codebook, Dmc};
use crate::decoders::{forney_decode, Outcome};
use crate::Result;
use crate::{exec, CoreError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All probability vectors of the given dimension whose entries are
/// multiples of `1/k` (compositions of `k`).
pub fn simplex_grid(dim: usize, k: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && k >= 1);
    let mut out = Vec::new();
    let mut counts = vec![0usize; dim];
    fn rec(slot: usize, left: usize, counts: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<f64>>) {
        if slot == counts.len() - 1 {
            counts[slot] = left;
            out.push(counts.iter().map(|&c| c as f64 / k as f64).collect());
            return;
        }
        for c in 0..=left {
            counts[slot] = c;
            rec(slot + 1, left - c, counts, k, out);
        }
    }
    rec(0, k, &mut counts, k, &mut out);
    out
}

/// Entropy without distribution validation (hill-climb iterates may drift
/// from exact normalization by rounding).
fn h(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

/// Deterministic hill climb on the simplex: repeatedly tries moving mass
/// between coordinate pairs with a shrinking step, keeping improvements.
fn hill_climb<F: Fn(&[f64]) -> f64>(f: &F, start: &[f64]) -> (Vec<f64>, f64) {
    let mut p = start.to_vec();
    let mut v = f(&p);
    let mut step = 0.02;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..p.len() {
            for j in 0..p.len() {
                if i == j || p[i] < step {
                    continue;
                }
                let mut q = p.clone();
                q[i] -= step;
                q[j] += step;
                let w = f(&q);
                if w > v {
                    p = q;
                    v = w;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (p, v)
}

/// Brute-force tilted conditional-entropy exponent: for each output symbol,
/// maximizes `H(p) + lambda sum over x of p(x) ln P(y|x)` over the simplex
/// by grid scan plus hill climb, then assembles
/// `ln|X| - sum over y of P_y(y) * max`.
pub fn f_exponent_oracle(py: &[f64], lambda: f64, ch: &Dmc, step: f64) -> Result<f64> {
    if py.len() != ch.output_size() {
        return Err(CoreError::LengthMismatch(format!(
            "P_y has {} entries for |Y| = {}",
            py.len(),
            ch.output_size()
        )));
    }
    let k = (1.0 / step).round().max(1.0) as usize;
    let grid = simplex_grid(ch.input_size(), k);
    let lnx = (ch.input_size() as f64).ln();
    let mut acc = 0.0;
    for (y, &w) in py.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let log_row: Vec<f64> = (0..ch.input_size()).map(|x| ch.log_prob(x, y)).collect();
        let obj = |p: &[f64]| -> f64 {
            h(p) + lambda
                * p.iter()
                    .zip(log_row.iter())
                    .filter(|(&pv, _)| pv > 0.0)
                    .map(|(&pv, &lr)| pv * lr)
                    .sum::<f64>()
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_p = grid[0].clone();
        for p in &grid {
            let v = obj(p);
            if v > best {
                best = v;
                best_p = p.clone();
            }
        }
        let (_, refined) = hill_climb(&obj, &best_p);
        acc += w * refined.max(best);
    }
    Ok(lnx - acc)
}

/// Brute-force two-channel exponent: minimizes
/// `F(P_y, 1-s, A) + rho F(P_y, s/rho, B) - H(P_y)` over the output simplex
/// by grid scan plus hill climb. The `F` terms use tilted sums directly so
/// this oracle shares no search code with the closed form it gates.
pub fn pair_exponent_oracle(
    ch_a: &Dmc,
    ch_b: &Dmc,
    rho: f64,
    s: f64,
    step: f64,
) -> Result<f64> {
    if rho <= 0.0 {
        return Err(CoreError::InvalidArgument(
            "the brute-force pair exponent needs rho > 0".into(),
        ));
    }
    let ny = ch_a.output_size();
    let lnx = (ch_a.input_size() as f64).ln();
    let ln_a: Vec<f64> = (0..ny)
        .map(|y| {
            safe_ln(
                (0..ch_a.input_size())
                    .map(|x| ch_a.prob(x, y).powf(1.0 - s))
                    .sum::<f64>(),
            )
        })
        .collect();
    let ln_b: Vec<f64> = (0..ny)
        .map(|y| {
            safe_ln(
                (0..ch_b.input_size())
                    .map(|x| ch_b.prob(x, y).powf(s / rho))
                    .sum::<f64>(),
            )
        })
        .collect();
    // F(P_y, lam) = ln|X| - sum over y of P_y ln(tilted sum), so the
    // objective as a function of P_y is linear minus the entropy.
    let obj_min = |py: &[f64]| -> f64 {
        let mut lin = 0.0;
        for y in 0..ny {
            if py[y] > 0.0 {
                lin += py[y] * (ln_a[y] + rho * ln_b[y]);
            }
        }
        (1.0 + rho) * lnx - lin - h(py)
    };
    let k = (1.0 / step).round().max(1.0) as usize;
    let grid = simplex_grid(ny, k);
    let mut best = f64::INFINITY;
    let mut best_p = grid[0].clone();
    for p in &grid {
        let v = obj_min(p);
        if v < best {
            best = v;
            best_p = p.clone();
        }
    }
    let neg = |p: &[f64]| -obj_min(p);
    let (_, refined_neg) = hill_climb(&neg, &best_p);
    Ok(best.min(-refined_neg))
}

/// Brute-force log average moment: enumerates every codeword of length
/// `y.len()` and log-sum-exps `lambda * ln P(y|x) - n ln|X|`.
pub fn u_moment_bruteforce(y: &[u8], lambda: f64, ch: &Dmc) -> Result<f64> {
    let n = y.len();
    let total = (ch.input_size() as u64)
        .checked_pow(n as u32)
        .ok_or_else(|| CoreError::BudgetExceeded(format!("|X|^{n} overflows")))?;
    let lnx = (ch.input_size() as f64).ln();
    let mut terms = Vec::with_capacity(total as usize);
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![0u8; n];
        for slot in x.iter_mut() {
            *slot = (rem % ch.input_size() as u64) as u8;
            rem /= ch.input_size() as u64;
        }
        let ll = crate::channel::log_likelihood(ch, &x, y)?;
        terms.push(lambda * ll - n as f64 * lnx);
    }
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Ok(m);
    }
    Ok(m + terms.iter().map(|&v| (v - m).exp()).sum::<f64>().ln())
}

/// Per-output-block assignment oracle for the erasure Lagrangian: counts the
/// output blocks where the likelihood-ratio rule's action is strictly worse
/// than the best single action. For block `y`, assigning it to message `m`
/// contributes `(1 + e^{-nT}) (1/M) sum over m' != m of P(y|x_m')` and
/// erasing contributes `e^{-nT} (1/M) sum over all m of P(y|x_m)`; an
/// optimal rule picks a minimizer for every block, so the expected count
/// is zero.
pub fn forney_assignment_violations(
    cb: &Codebook,
    ch: &Dmc,
    t: f64,
    tol: f64,
) -> Result<usize> {
    let n = cb.n();
    let total = (ch.output_size() as u64)
        .checked_pow(n as u32)
        .ok_or_else(|| CoreError::BudgetExceeded(format!("|Y|^{n} overflows")))?;
    let weight = (-(n as f64) * t).exp();
    let m_count = cb.m() as f64;
    let violations = exec::chunked_fold(
        total,
        1u64 << 12,
        |range| -> Result<usize> {
            let mut bad = 0usize;
            for idx in range {
                let mut rem = idx;
                let mut y = vec![0u8; n];
                for slot in y.iter_mut() {
                    *slot = (rem % ch.output_size() as u64) as u8;
                    rem /= ch.output_size() as u64;
                }
                let p: Vec<f64> = cb
                    .words()
                    .iter()
                    .map(|x| crate::channel::log_likelihood(ch, x, &y).map(f64::exp))
                    .collect::<Result<_>>()?;
                let mass: f64 = p.iter().sum();
                let erase_cost = weight * mass / m_count;
                let decode_cost =
                    |m: usize| (1.0 + weight) * (mass - p[m]) / m_count;
                let best = (0..cb.m())
                    .map(decode_cost)
                    .fold(erase_cost, f64::min);
                let chosen = match forney_decode(cb, &y, ch, t)?.outcome {
                    Outcome::Erasure => erase_cost,
                    Outcome::Message(m) => decode_cost(m),
                };
                if chosen > best + tol * best.max(1e-300) {
                    bad += 1;
                }
            }
            Ok(bad)
        },
        |a, b| Ok(a? + b?),
        Ok(0usize),
    );
    violations
}

/// A random channel with Dirichlet(1)-distributed rows (strictly positive
/// almost surely), deterministic per seed.
pub fn random_dmc(input_size: usize, output_size: usize, seed: u64) -> Result<Dmc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(input_size);
    for _ in 0..input_size {
        let raw: Vec<f64> = (0..output_size)
            .map(|_| {
                let u: f64 = rng.gen_range(1e-12..1.0);
                -u.ln()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        rows.push(raw.into_iter().map(|v| v / sum).collect());
    }
    Dmc::new(rows)
}

/// A random probability vector (Dirichlet(1)), deterministic per seed.
pub fn random_distribution(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-12..1.0);
            -u.ln()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{joint_type, ChannelFamily};
    use crate::exponents::{f_exponent, pair_exponent, u_moment};
    use crate::tol::CLOSED_FORM_ORACLE_TOL;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_grid_enumerates_compositions() {
        let pts = simplex_grid(2, 4);
        assert_eq!(pts.len(), 5);
        for p in &pts {
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        // dim 3, k 10: C(12, 2) = 66 compositions.
        assert_eq!(simplex_grid(3, 10).len(), 66);
    }

    #[test]
    fn closed_form_f_matches_brute_force() {
        for seed in 0..4u64 {
            let ch = random_dmc(2 + (seed as usize) % 2, 2 + (seed as usize + 1) % 2, seed).unwrap();
            let py = random_distribution(ch.output_size(), seed + 100);
            for &lam in &[0.3, 0.8, 1.5] {
                let closed = f_exponent(&py, lam, &ch).unwrap();
                let brute = f_exponent_oracle(&py, lam, &ch, 0.01).unwrap();
                assert!(
                    (closed - brute).abs() <= CLOSED_FORM_ORACLE_TOL,
                    "seed {seed} lam {lam}: closed {closed} vs brute {brute}"
                );
                // The brute force can only undershoot the true maximum, so
                // the closed form is never below it (up to refinement fuzz).
                assert!(closed <= brute + CLOSED_FORM_ORACLE_TOL);
            }
        }
    }

    #[test]
    fn closed_form_pair_matches_brute_force() {
        for seed in 10..14u64 {
            let a = random_dmc(2, 2, seed).unwrap();
            let b = random_dmc(2, 2, seed + 50).unwrap();
            for &(s, rho) in &[(0.2, 0.5), (0.45, 0.9)] {
                let closed = pair_exponent(&a, &b, rho, s).unwrap();
                let brute = pair_exponent_oracle(&a, &b, rho, s, 0.01).unwrap();
                assert!(
                    (closed - brute).abs() <= CLOSED_FORM_ORACLE_TOL,
                    "seed {seed}: closed {closed} vs brute {brute}"
                );
            }
        }
    }

    #[test]
    fn u_moment_matches_enumeration_exactly() {
        let ch = Dmc::bsc(0.2).unwrap();
        let y = [0u8, 1, 1, 0, 1, 0];
        for &lam in &[0.0, 0.5, 1.0, 2.0] {
            let closed = u_moment(&y, lam, &ch).unwrap();
            let brute = u_moment_bruteforce(&y, lam, &ch).unwrap();
            assert_abs_diff_eq!(closed, brute, epsilon = 1e-9);
        }
        let ch3 = random_dmc(3, 2, 77).unwrap();
        let y = [0u8, 1, 0, 0];
        let closed = u_moment(&y, 0.7, &ch3).unwrap();
        let brute = u_moment_bruteforce(&y, 0.7, &ch3).unwrap();
        assert_abs_diff_eq!(closed, brute, epsilon = 1e-9);
    }

    #[test]
    fn u_moment_type_bound_holds() {
        let ch = Dmc::bsc(0.15).unwrap();
        let n = 8;
        let y: Vec<u8> = (0..n).map(|i| ((i * 3) % 2) as u8).collect();
        let x_placeholder = vec![0u8; n];
        let jt = joint_type(&x_placeholder, &y, ch.input_size(), ch.output_size()).unwrap();
        let py = jt.output_marginal();
        for &lam in &[0.4, 1.0, 1.7] {
            let lhs = u_moment(&y, lam, &ch).unwrap();
            let f = f_exponent(&py, lam, &ch).unwrap();
            let slack = (ch.output_size() as f64)
                * (ch.input_size() as f64 - 1.0)
                * ((n + 1) as f64).ln();
            assert!(
                lhs <= slack - (n as f64) * f + 1e-9,
                "lam {lam}: {lhs} vs {}",
                slack - (n as f64) * f
            );
        }
    }

    #[test]
    fn likelihood_rule_is_block_optimal_on_small_instance() {
        let ch = Dmc::bsc(0.1).unwrap();
        let fam = ChannelFamily::bsc_grid(&[0.1]).unwrap();
        assert_eq!(fam.len(), 1);
        let cb = Codebook::new(
            vec![vec![0, 0, 0, 0], vec![0, 1, 1, 0], vec![1, 1, 1, 1]],
            2,
        )
        .unwrap();
        for &t in &[0.0, 0.05, 0.3] {
            let v = forney_assignment_violations(&cb, &ch, t, 1e-9).unwrap();
            assert_eq!(v, 0, "T = {t}");
        }
    }

    #[test]
    fn random_channels_are_valid() {
        for seed in 0..10u64 {
            let ch = random_dmc(3, 3, seed).unwrap();
            for x in 0..3 {
                let s: f64 = ch.row(x).iter().sum();
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-9);
            }
        }
        let p = random_distribution(4, 3);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
