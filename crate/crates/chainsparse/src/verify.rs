//! Accuracy verification, counting-bound audits, and Monte Carlo validation
//! of the subsampling concentration bound.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitWord;

use crate::code::{Code, WeightVector, REL_TOLERANCE};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled { seed: u64, size: usize },
}

/// Result of checking `⟨w̃, c⟩ ∈ (1 ± ε)·⟨w, c⟩` over the code's words.
/// The exhaustive mode is the ground truth for all acceptance checks.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub epsilon: f64,
    pub words_checked: usize,
    pub max_relative_error: f64,
    pub worst_word: Option<String>,
    pub pass: bool,
}

fn check_words(
    words: &[BitWord],
    w: &WeightVector,
    tilde: &WeightVector,
    epsilon: f64,
) -> (usize, f64, Option<String>, bool) {
    let per_word = |word: &BitWord| -> Option<(f64, bool, BitWord)> {
        if word.is_zero() {
            return None;
        }
        let mut orig = 0.0;
        let mut new = 0.0;
        for i in word.support() {
            orig += w.get(i);
            new += tilde.get(i);
        }
        let dev_abs = (new - orig).abs();
        let ok = dev_abs <= epsilon * orig + REL_TOLERANCE;
        let rel = if orig > 0.0 {
            dev_abs / orig
        } else if dev_abs <= REL_TOLERANCE {
            0.0
        } else {
            f64::INFINITY
        };
        Some((rel, ok, word.clone()))
    };
    let checked: Vec<(f64, bool, BitWord)> = words.par_iter().filter_map(per_word).collect();
    let n = checked.len();
    let pass = checked.iter().all(|(_, ok, _)| *ok);
    let worst = checked
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.2.cmp(&a.2)));
    match worst {
        Some((rel, _, word)) => (n, rel, Some(word.to_bitstring()), pass),
        None => (n, 0.0, None, pass),
    }
}

/// Exhaustive verification over every distinct nonzero word.
pub fn verify_sparsifier(
    code: &Code,
    w: &WeightVector,
    tilde: &WeightVector,
    epsilon: f64,
) -> Result<VerificationReport> {
    if w.m() != code.m() || tilde.m() != code.m() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: code m = {}, w m = {}, w̃ m = {}",
            code.m(),
            w.m(),
            tilde.m()
        )));
    }
    let (words_checked, max_rel, worst_word, pass) =
        check_words(code.words(), w, tilde, epsilon);
    Ok(VerificationReport {
        mode: VerifyMode::Exhaustive,
        epsilon,
        words_checked,
        max_relative_error: max_rel,
        worst_word,
        pass,
    })
}

/// Verification over a uniform sample of words; a cheaper spot check for
/// codes too large to enumerate comfortably.
pub fn verify_sparsifier_sampled(
    code: &Code,
    w: &WeightVector,
    tilde: &WeightVector,
    epsilon: f64,
    seed: u64,
    size: usize,
) -> Result<VerificationReport> {
    if w.m() != code.m() || tilde.m() != code.m() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let mut rng = substream(seed, "verify-sample");
    let words: Vec<BitWord> = (0..size.min(code.word_count()))
        .map(|_| code.words()[rng.gen_range(0..code.word_count())].clone())
        .collect();
    let (words_checked, max_rel, worst_word, pass) = check_words(&words, w, tilde, epsilon);
    Ok(VerificationReport {
        mode: VerifyMode::Sampled { seed, size },
        epsilon,
        words_checked,
        max_relative_error: max_rel,
        worst_word,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingAuditRow {
    pub alpha: usize,
    pub weight_threshold: f64,
    pub count: usize,
    /// `binom(CL, α) · (m+1)^α`, reported as a string since it saturates.
    pub bound: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingAudit {
    pub cl_value: usize,
    pub d_or_phi: f64,
    pub rows: Vec<CountingAuditRow>,
    pub pass: bool,
}

/// `binom(cl, α)` with the empty-product convention: 1 whenever `α ≥ cl`
/// (a contraction run with threshold above the chain length performs no
/// steps, so no binomial survival factor applies).
pub(crate) fn binomial_or_one(cl: usize, alpha: usize) -> u128 {
    if alpha >= cl {
        return 1;
    }
    let k = alpha.min(cl - alpha) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(cl as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// For each `α ∈ [1, alpha_max]`, count distinct words of weight
/// `≤ α · d_or_phi` and compare against `binom(CL, α)·(m+1)^α`.
/// `cl_value` must be a valid upper bound on CL(C); a larger bound only
/// loosens the audit.
pub fn counting_bound_audit(
    code: &Code,
    cl_value: usize,
    d_or_phi: f64,
    alpha_max: usize,
) -> CountingAudit {
    let m1 = (code.m() + 1) as u128;
    let mut rows = Vec::with_capacity(alpha_max);
    let mut pass = true;
    for alpha in 1..=alpha_max {
        let threshold = alpha as f64 * d_or_phi;
        let count = code
            .words()
            .iter()
            .filter(|w| (w.weight() as f64) <= threshold + REL_TOLERANCE)
            .count();
        let binom = binomial_or_one(cl_value, alpha);
        let (bound_str, ok) = match binom.checked_mul(pow_saturating(m1, alpha as u32)) {
            Some(b) if b != u128::MAX => (b.to_string(), (count as u128) <= b),
            _ => ("overflow".to_string(), true),
        };
        pass &= ok;
        rows.push(CountingAuditRow {
            alpha,
            weight_threshold: threshold,
            count,
            bound: bound_str,
            pass: ok,
        });
    }
    CountingAudit {
        cl_value,
        d_or_phi,
        rows,
        pass,
    }
}

fn pow_saturating(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

/// Convenience wrapper: true iff the audit passes for every α.
pub fn counting_bound_holds(code: &Code, cl_value: usize, d_or_phi: f64, alpha_max: usize) -> bool {
    counting_bound_audit(code, cl_value, d_or_phi, alpha_max).pass
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationOutcome {
    pub ell: usize,
    pub p: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub failures: u64,
    pub empirical_rate: f64,
    /// `2·exp(-0.38·ε²·ℓ·p)`.
    pub bound: f64,
    /// Binomial standard error of the failure-rate estimate at the bound.
    pub sigma: f64,
}

/// Simulate `Σ X_i` with `X_i = 1/p` w.p. `p` and count how often the sum
/// leaves `(1 ± ε)·ℓ`. The test suite asserts the empirical rate stays below
/// the tail bound plus three standard errors.
pub fn concentration_monte_carlo(
    ell: usize,
    p: f64,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<ConcentrationOutcome> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("p must lie in (0, 1], got {p}")));
    }
    if ell == 0 || trials == 0 {
        return Err(Error::InvalidInput("ell and trials must be positive".into()));
    }
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, &format!("concentration/{t}"));
            let hits = if p == 1.0 {
                ell
            } else if p == 0.5 {
                // Popcount of ℓ fair bits.
                let mut total = 0usize;
                let mut remaining = ell;
                while remaining >= 64 {
                    total += rng.gen::<u64>().count_ones() as usize;
                    remaining -= 64;
                }
                if remaining > 0 {
                    let mask = (1u64 << remaining) - 1;
                    total += (rng.gen::<u64>() & mask).count_ones() as usize;
                }
                total
            } else {
                (0..ell).filter(|_| rng.gen_bool(p)).count()
            };
            let sum = hits as f64 / p;
            let lo = (1.0 - epsilon) * ell as f64 - REL_TOLERANCE;
            let hi = (1.0 + epsilon) * ell as f64 + REL_TOLERANCE;
            u64::from(sum < lo || sum > hi)
        })
        .sum();
    let bound = 2.0 * (-0.38 * epsilon * epsilon * ell as f64 * p).exp();
    let sigma = if bound >= 1.0 {
        0.0
    } else {
        (bound * (1.0 - bound) / trials as f64).sqrt()
    };
    Ok(ConcentrationOutcome {
        ell,
        p,
        epsilon,
        trials,
        failures,
        empirical_rate: failures as f64 / trials as f64,
        bound,
        sigma,
    })
}
