//! The randomized contraction procedure and empirical validation of its
//! survival bound.
//!
//! `contract(C, α)` repeatedly picks a uniform support coordinate and drops
//! every word hitting it, while `CL(C) ≥ α`, then returns a uniform
//! surviving word. One boundary subtlety is deliberate: the survival bound
//! `(m+1)^{-α}·binom(CL, α)^{-1}` is proved for the run stopped as soon as
//! `CL(C) ≤ α`, i.e. for a loop condition one stricter than the procedure
//! box. [`contract`] follows the box verbatim (loop while `CL ≥ α`);
//! [`survival_probability_experiment`] runs the stopped-at-`CL ≤ α` variant
//! the bound actually applies to.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitWord;
use crate::chain::{chain_length_exact, greedy_chain};
use crate::code::Code;
use crate::density::{density, SearchMode};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::verify::binomial_or_one;

/// Full record of one contraction run.
#[derive(Clone, Debug, Serialize)]
pub struct ContractionTrace {
    pub alpha: usize,
    /// Coordinates picked, in order.
    pub picked: Vec<usize>,
    /// Surviving word count after each step.
    pub sizes: Vec<usize>,
    #[serde(serialize_with = "serialize_opt_word")]
    pub returned: Option<BitWord>,
}

fn serialize_opt_word<S: serde::Serializer>(
    w: &Option<BitWord>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some(w) => s.serialize_some(&w.to_bitstring()),
        None => s.serialize_none(),
    }
}

/// Drop every word with a one at coordinate `i`.
pub fn contract_step(code: &Code, i: usize) -> Result<Code> {
    if i >= code.m() {
        return Err(Error::InvalidInput(format!(
            "coordinate {i} out of range (m = {})",
            code.m()
        )));
    }
    let survivors: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.get(i))
        .cloned()
        .collect();
    if survivors.len() == code.word_count() {
        return Err(Error::InvalidInput(format!(
            "coordinate {i} is not in the support"
        )));
    }
    code.subcode(survivors)
}

/// Core loop shared by [`contract`] and the survival experiment: contract
/// while `CL(C) ≥ stop_at`, then return a uniform surviving word.
///
/// The chain length test uses the greedy lower bound first and falls back to
/// the exact solver only when the bound is inconclusive.
fn contract_run<R: Rng>(
    code: &Code,
    alpha: usize,
    stop_at: usize,
    budget: u64,
    rng: &mut R,
) -> Result<ContractionTrace> {
    let mut cur = code.clone();
    let mut picked = Vec::new();
    let mut sizes = Vec::new();
    loop {
        let keep_going = if greedy_chain(&cur).len() >= stop_at {
            true
        } else {
            chain_length_exact(&cur, budget)?.0 >= stop_at
        };
        if !keep_going {
            break;
        }
        let supp = cur.support();
        let i = supp[rng.gen_range(0..supp.len())];
        cur = contract_step(&cur, i)?;
        picked.push(i);
        sizes.push(cur.word_count());
    }
    let returned = if cur.word_count() == 0 {
        None
    } else {
        Some(cur.words()[rng.gen_range(0..cur.word_count())].clone())
    };
    Ok(ContractionTrace {
        alpha,
        picked,
        sizes,
        returned,
    })
}

/// Contract while `CL(C) ≥ α`; deterministic given the RNG state.
pub fn contract<R: Rng>(code: &Code, alpha: usize, budget: u64, rng: &mut R) -> Result<ContractionTrace> {
    if alpha == 0 {
        return Err(Error::InvalidInput("alpha must be at least 1".into()));
    }
    contract_run(code, alpha, alpha, budget, rng)
}

/// The survival lower bound `(m+1)^{-α} / binom(CL, α)`, with the
/// empty-product convention `binom(CL, α) = 1` for `α ≥ CL`.
pub fn survival_lower_bound(cl: usize, alpha: usize, m: usize) -> f64 {
    let binom = binomial_or_one(cl, alpha) as f64;
    ((m + 1) as f64).powi(-(alpha as i32)) / binom
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalOutcome {
    pub target: String,
    pub alpha: usize,
    pub trials: u64,
    pub hits: u64,
    pub empirical: f64,
    pub lower_bound: f64,
    /// Binomial standard error of the estimate at the bound.
    pub sigma: f64,
    pub cl: usize,
    pub phi: f64,
}

/// Estimate how often the contraction stopped at `CL ≤ α` returns `target`.
///
/// The bound applies to words of weight at most `α·Φ(C)`; the check rounds
/// the threshold up to the next integer since word weights are integral
/// (the triangle cut code's weight-2 words at `α·Φ = 1.5` are the canonical
/// boundary case). Requires exact Φ, so the code must be small.
pub fn survival_probability_experiment(
    code: &Code,
    target: &BitWord,
    alpha: usize,
    trials: u64,
    budget: u64,
    seed: u64,
) -> Result<SurvivalOutcome> {
    if alpha == 0 || trials == 0 {
        return Err(Error::InvalidInput("alpha and trials must be positive".into()));
    }
    if !code.contains(target) {
        return Err(Error::InvalidInput("target word is not in the code".into()));
    }
    let phi = density(code, SearchMode::Exact)?.phi;
    let weight_cap = (alpha as f64 * phi).ceil();
    if (target.weight() as f64) > weight_cap {
        return Err(Error::InvalidInput(format!(
            "target weight {} exceeds ⌈α·Φ⌉ = {weight_cap}; the survival bound does not apply",
            target.weight()
        )));
    }
    let (cl, _) = chain_length_exact(code, budget)?;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, &format!("contract-trial/{t}"));
            let trace = contract_run(code, alpha, alpha + 1, budget, &mut rng)
                .expect("exact CL succeeded on the full code, subcodes are smaller");
            u64::from(trace.returned.as_ref() == Some(target))
        })
        .sum();
    let lower_bound = survival_lower_bound(cl, alpha, code.m());
    let sigma = (lower_bound * (1.0 - lower_bound) / trials as f64).sqrt();
    Ok(SurvivalOutcome {
        target: target.to_bitstring(),
        alpha,
        trials,
        hits,
        empirical: hits as f64 / trials as f64,
        lower_bound,
        sigma,
        cl,
        phi,
    })
}
