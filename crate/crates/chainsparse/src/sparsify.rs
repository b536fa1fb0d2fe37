//! Recursive peel-and-subsample sparsification of unweighted codes.
//!
//! One node of the recursion: decompose the code at density threshold
//! `d = sqrt(m'·η / CL)`, keep the peeled coordinates aside, subsample the
//! remaining coordinates at rate `p = sqrt(η·CL / m')` with weight `1/p`,
//! and recurse on both parts. η is always computed from the ORIGINAL m; the
//! recursion depth is capped at ⌈log₂log₂ m⌉. A node whose size target
//! `2·sqrt(CL·m'·η)` already reaches its support retains everything.
//!
//! Acceptance of a subsample is decided by exhaustive per-word verification
//! rather than by trusting the tail bound, so any returned sparsifier is
//! valid by construction; the tail bound only predicts how often the
//! rejection loop retries.
//!
//! Theory mode uses the constants η = 1000·log₂(m)·(20·llog(m)/ε)² and
//! per-level accuracy ε/(20·llog(m)); at desk scales these force the
//! retain-everything branch, so practical mode exposes both constants as
//! knobs with defaults small enough to see actual shrinkage.

use rand::Rng;
use serde::Serialize;

use crate::bits::BitWord;
use crate::code::{Code, WeightVector, REL_TOLERANCE};
use crate::density::{decompose, SearchMode, EXACT_DENSITY_WORD_LIMIT};
use crate::error::{Error, Result};
use crate::rng::substream;

pub const THEORY_ETA_CONSTANT: f64 = 1000.0;
pub const THEORY_DENOM_CONSTANT: f64 = 20.0;
pub const PRACTICAL_ETA_CONSTANT: f64 = 0.025;
pub const PRACTICAL_DENOM_CONSTANT: f64 = 1.0;
pub const DEFAULT_ATTEMPT_CAP: usize = 100;
/// Node budget for the internal exact chain-length probes; deliberately
/// smaller than the standalone default since a failed probe only loosens
/// the bound used for `d` and `p`.
pub const DEFAULT_CL_PROBE_BUDGET: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Theory,
    Practical,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsifyParams {
    pub epsilon: f64,
    pub mode: Mode,
    pub eta_constant: f64,
    pub denom_constant: f64,
    /// Recursion depth cap; `None` means ⌈llog(m)⌉ of the input code.
    pub max_depth: Option<usize>,
    pub attempt_cap: usize,
    /// Known upper bound on the chain length, e.g. |V|−1 for cut codes or
    /// the generator rank for linear-code supports. Without it each node
    /// probes the exact solver and falls back to the support-size bound.
    pub cl_bound: Option<usize>,
    pub seed: u64,
    pub cl_probe_budget: u64,
}

impl SparsifyParams {
    pub fn theory(epsilon: f64, seed: u64) -> Self {
        SparsifyParams {
            epsilon,
            mode: Mode::Theory,
            eta_constant: THEORY_ETA_CONSTANT,
            denom_constant: THEORY_DENOM_CONSTANT,
            max_depth: None,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
            cl_bound: None,
            seed,
            cl_probe_budget: DEFAULT_CL_PROBE_BUDGET,
        }
    }

    pub fn practical(epsilon: f64, seed: u64) -> Self {
        SparsifyParams {
            epsilon,
            mode: Mode::Practical,
            eta_constant: PRACTICAL_ETA_CONSTANT,
            denom_constant: PRACTICAL_DENOM_CONSTANT,
            max_depth: None,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
            cl_bound: None,
            seed,
            cl_probe_budget: DEFAULT_CL_PROBE_BUDGET,
        }
    }

    pub fn with_cl_bound(mut self, bound: usize) -> Self {
        self.cl_bound = Some(bound);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// `llog(m) = max(1, log₂ log₂ m)`: the floor keeps the accuracy split and
/// η well-defined for m < 4.
pub fn llog2(m: usize) -> f64 {
    debug_assert!(m >= 2);
    (m as f64).log2().log2().max(1.0)
}

/// `η = eta_constant · log₂(m) · (denom_constant · llog(m) / ε)²`.
pub fn compute_eta(m: usize, epsilon: f64, params: &SparsifyParams) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "eta requires m ≥ 2, got {m}"
        )));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "eta requires ε > 0, got {epsilon}"
        )));
    }
    let ll = llog2(m);
    let ratio = params.denom_constant * ll / epsilon;
    Ok(params.eta_constant * (m as f64).log2() * ratio * ratio)
}

/// Per-level accuracy `ε / (denom_constant · llog(m))`.
pub fn per_level_epsilon(m: usize, epsilon: f64, params: &SparsifyParams) -> f64 {
    epsilon / (params.denom_constant * llog2(m))
}

/// Conservative composition of per-stage accuracies: the larger of
/// `Π(1+εᵢ) − 1` and `1 − Π(1−εᵢ)`.
pub fn compose_accuracy(stage_eps: &[f64]) -> f64 {
    let up: f64 = stage_eps.iter().fold(1.0, |acc, e| acc * (1.0 + e)) - 1.0;
    let down: f64 = 1.0 - stage_eps.iter().fold(1.0, |acc, e| acc * (1.0 - e));
    up.max(down)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsampleOutcome {
    /// Sampled coordinates, local to the code handed in.
    pub coords: Vec<usize>,
    pub weight: f64,
    pub p: f64,
    pub attempts: usize,
    /// True when `p ≥ 1` made sampling a no-op.
    pub degenerate: bool,
}

/// Sample the support at rate `p = min(1, sqrt(η·CL/m'))` with weight `1/p`,
/// accepting only when every nonzero word lands within `(1 ± target_eps)` of
/// its true weight and the sample is at most `2·sqrt(CL·m'·η)` coordinates.
pub fn subsample_remaining<R: Rng>(
    code: &Code,
    cl_bound: usize,
    eta: f64,
    target_eps: f64,
    attempt_cap: usize,
    rng: &mut R,
) -> Result<SubsampleOutcome> {
    if cl_bound == 0 {
        return Err(Error::InvalidInput("CL bound must be positive".into()));
    }
    let support = code.support();
    let m_prime = support.len();
    if m_prime == 0 {
        return Ok(SubsampleOutcome {
            coords: Vec::new(),
            weight: 1.0,
            p: 1.0,
            attempts: 0,
            degenerate: true,
        });
    }
    let p = (eta * cl_bound as f64 / m_prime as f64).sqrt();
    if p >= 1.0 {
        return Ok(SubsampleOutcome {
            coords: support,
            weight: 1.0,
            p: 1.0,
            attempts: 0,
            degenerate: true,
        });
    }
    let size_cap = 2.0 * (cl_bound as f64 * m_prime as f64 * eta).sqrt();
    let weight = 1.0 / p;
    for attempt in 1..=attempt_cap {
        let picked: Vec<usize> = support
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(p))
            .collect();
        if picked.len() as f64 > size_cap + REL_TOLERANCE {
            continue;
        }
        let mut mask = BitWord::zeros(code.m());
        for &i in &picked {
            mask.set(i, true);
        }
        let accurate = code.words().iter().all(|w| {
            if w.is_zero() {
                return true;
            }
            let truth = w.weight() as f64;
            let value = w.and_weight(&mask) as f64 * weight;
            (value - truth).abs() <= target_eps * truth + REL_TOLERANCE
        });
        if accurate {
            return Ok(SubsampleOutcome {
                coords: picked,
                weight,
                p,
                attempts: attempt,
                degenerate: false,
            });
        }
    }
    Err(Error::AttemptsExhausted {
        attempts: attempt_cap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeReport {
    pub path: String,
    pub depth: usize,
    pub support: usize,
    pub cl_bound: usize,
    pub d: Option<f64>,
    pub p: Option<f64>,
    pub peeled: usize,
    pub sampled: usize,
    pub attempts: usize,
    /// Why this node stopped recursing, when it did.
    pub leaf: Option<String>,
    /// Support bound `4·CL·(m/CL)^{1/2^depth}·η` from the size recurrence.
    pub size_bound: f64,
    pub within_size_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SparsifyReport {
    pub epsilon: f64,
    pub mode: Mode,
    pub seed: u64,
    pub eta_constant: f64,
    pub denom_constant: f64,
    pub eta: f64,
    pub per_level_epsilon: f64,
    pub max_depth: usize,
    pub root_cl_bound: usize,
    pub support_size: usize,
    /// Depths at which a subsample actually happened.
    pub sampled_depths: Vec<usize>,
    /// `Π(1 + per-level ε) − 1` over the sampled depths.
    pub composed_epsilon: f64,
    pub max_relative_error: f64,
    pub nodes: Vec<NodeReport>,
}

struct Rec<'a> {
    params: &'a SparsifyParams,
    eta: f64,
    lvl_eps: f64,
    max_depth: usize,
    root_cl: usize,
    root_m: usize,
    weights: Vec<f64>,
    nodes: Vec<NodeReport>,
    sampled_depths: std::collections::BTreeSet<usize>,
}

impl Rec<'_> {
    fn node_cl(&self, code: &Code, support: usize) -> usize {
        let bound = match self.params.cl_bound {
            Some(b) => b.min(support),
            None => match crate::chain::chain_length_exact(code, self.params.cl_probe_budget) {
                Ok((v, _)) => v,
                Err(_) => crate::chain::chain_length_bounds(code).1,
            },
        };
        bound.max(1)
    }

    fn size_bound(&self, depth: usize) -> f64 {
        let ratio = self.root_m as f64 / self.root_cl as f64;
        4.0 * self.root_cl as f64 * ratio.powf(1.0 / (1u64 << depth.min(60)) as f64) * self.eta
    }

    fn run(&mut self, code: &Code, depth: usize, multiplier: f64, path: String) -> Result<()> {
        let support = code.support_size();
        let size_bound = self.size_bound(depth);
        let within = (support as f64) <= size_bound + REL_TOLERANCE;
        if support == 0 {
            self.nodes.push(NodeReport {
                path,
                depth,
                support,
                cl_bound: 0,
                d: None,
                p: None,
                peeled: 0,
                sampled: 0,
                attempts: 0,
                leaf: Some("empty-support".into()),
                size_bound,
                within_size_bound: within,
            });
            return Ok(());
        }
        let cl = self.node_cl(code, support);
        let target = 2.0 * (cl as f64 * support as f64 * self.eta).sqrt();
        if depth == self.max_depth || target >= support as f64 {
            for &orig in code.coords() {
                self.weights[orig as usize] += multiplier;
            }
            self.nodes.push(NodeReport {
                path,
                depth,
                support,
                cl_bound: cl,
                d: None,
                p: None,
                peeled: 0,
                sampled: 0,
                attempts: 0,
                leaf: Some(if depth == self.max_depth {
                    "max-depth".into()
                } else {
                    "retain-everything".into()
                }),
                size_bound,
                within_size_bound: within,
            });
            return Ok(());
        }
        let d = (support as f64 * self.eta / cl as f64).sqrt();
        let mode = if code.nonzero_word_count() <= EXACT_DENSITY_WORD_LIMIT {
            SearchMode::Exact
        } else {
            SearchMode::Heuristic
        };
        let dec = decompose(code, d, mode, Some(cl), self.params.cl_probe_budget)?;
        let mut sampled = 0;
        let mut attempts = 0;
        let mut p = None;
        if dec.remaining_code.support_size() > 0 {
            let mut rng = substream(self.params.seed, &format!("sparsify/{path}"));
            let sub = subsample_remaining(
                &dec.remaining_code,
                cl,
                self.eta,
                self.lvl_eps,
                self.params.attempt_cap,
                &mut rng,
            )?;
            sampled = sub.coords.len();
            attempts = sub.attempts;
            p = Some(sub.p);
            if !sub.degenerate {
                self.sampled_depths.insert(depth);
            }
            let child = dec.remaining_code.restrict(&sub.coords)?;
            self.run(
                &child,
                depth + 1,
                multiplier * sub.weight,
                format!("{path}.s"),
            )?;
        }
        if !dec.peeled.is_empty() {
            self.run(&dec.peel_code, depth + 1, multiplier, format!("{path}.p"))?;
        }
        self.nodes.push(NodeReport {
            path,
            depth,
            support,
            cl_bound: cl,
            d: Some(d),
            p,
            peeled: dec.peeled.len(),
            sampled,
            attempts,
            leaf: None,
            size_bound,
            within_size_bound: within,
        });
        Ok(())
    }
}

/// Sparsify an unweighted code to accuracy `(1 ± ε)`. The returned weights
/// are indexed by the input code's own coordinates. The output is verified
/// exhaustively before returning; an output failing its own contract is an
/// error, never a silent return.
pub fn sparsify_unweighted(code: &Code, params: &SparsifyParams) -> Result<(WeightVector, SparsifyReport)> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    let m = code.m();
    let root = code.rebased();
    if m < 2 {
        // Too small for the η formula; keep everything.
        let w = WeightVector::uniform(m, 1.0);
        let report = SparsifyReport {
            epsilon: eps,
            mode: params.mode,
            seed: params.seed,
            eta_constant: params.eta_constant,
            denom_constant: params.denom_constant,
            eta: 0.0,
            per_level_epsilon: 0.0,
            max_depth: 0,
            root_cl_bound: m,
            support_size: w.support_size(),
            sampled_depths: vec![],
            composed_epsilon: 0.0,
            max_relative_error: 0.0,
            nodes: vec![],
        };
        return Ok((w, report));
    }
    let eta = compute_eta(m, eps, params)?;
    let lvl_eps = per_level_epsilon(m, eps, params);
    let max_depth = params.max_depth.unwrap_or(llog2(m).ceil() as usize).max(1);
    let support = root.support_size();
    let root_cl = if support == 0 {
        1
    } else {
        match params.cl_bound {
            Some(b) => b.min(support).max(1),
            None => match crate::chain::chain_length_exact(&root, params.cl_probe_budget) {
                Ok((v, _)) => v.max(1),
                Err(_) => crate::chain::chain_length_bounds(&root).1.max(1),
            },
        }
    };
    let mut rec = Rec {
        params,
        eta,
        lvl_eps,
        max_depth,
        root_cl,
        root_m: m,
        weights: vec![0.0; m],
        nodes: Vec::new(),
        sampled_depths: std::collections::BTreeSet::new(),
    };
    rec.run(&root, 0, 1.0, "r".into())?;
    let tilde = WeightVector::new(rec.weights.clone())?;
    let ones = WeightVector::uniform(m, 1.0);
    let verification = crate::verify::verify_sparsifier(code, &ones, &tilde, eps)?;
    if !verification.pass {
        return Err(Error::CertificateViolation(format!(
            "composed accuracy {} exceeded ε = {eps}",
            verification.max_relative_error
        )));
    }
    let sampled_depths: Vec<usize> = rec.sampled_depths.iter().copied().collect();
    let composed = compose_accuracy(&vec![lvl_eps; sampled_depths.len()]);
    let report = SparsifyReport {
        epsilon: eps,
        mode: params.mode,
        seed: params.seed,
        eta_constant: params.eta_constant,
        denom_constant: params.denom_constant,
        eta,
        per_level_epsilon: lvl_eps,
        max_depth,
        root_cl_bound: root_cl,
        support_size: tilde.support_size(),
        sampled_depths,
        composed_epsilon: composed,
        max_relative_error: verification.max_relative_error,
        nodes: rec.nodes,
    };
    Ok((tilde, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::parallel_block_code;
    use crate::verify::verify_sparsifier;

    #[test]
    fn eta_theory_example() {
        let p = SparsifyParams::theory(1.0, 0);
        let eta = compute_eta(4, 1.0, &p).unwrap();
        assert!((eta - 800_000.0).abs() < 1e-6, "{eta}");
    }

    #[test]
    fn eta_small_m_uses_llog_floor() {
        let p = SparsifyParams::theory(0.5, 0);
        // log₂log₂2 = 0, floored to 1.
        assert_eq!(llog2(2), 1.0);
        let eta = compute_eta(2, 0.5, &p).unwrap();
        let expect = 1000.0 * 1.0 * (20.0 * 1.0 / 0.5f64).powi(2);
        assert!((eta - expect).abs() < 1e-9);
    }

    #[test]
    fn eta_practical_flags_example() {
        let mut p = SparsifyParams::practical(0.5, 0);
        p.eta_constant = 1.0;
        p.denom_constant = 1.0;
        let eta = compute_eta(1024, 0.5, &p).unwrap();
        // 10 · (log₂ 10 / 0.5)² = 441.408…
        assert!((eta - 441.408).abs() < 0.01, "{eta}");
    }

    #[test]
    fn eta_rejects_tiny_m() {
        let p = SparsifyParams::theory(0.5, 0);
        assert!(compute_eta(1, 0.5, &p).is_err());
    }

    #[test]
    fn compose_accuracy_examples() {
        assert_eq!(compose_accuracy(&[0.0]), 0.0);
        let v = compose_accuracy(&[0.1, 0.1]);
        assert!((v - 0.21).abs() < 1e-12);
        // The per-level schedule ε/(20·llog) composed llog times stays well
        // within ε for llog ∈ 1..=6.
        for ll in 1..=6 {
            let eps = 0.4;
            let lvl = eps / (20.0 * ll as f64);
            let composed = compose_accuracy(&vec![lvl; ll]);
            assert!(composed <= 0.15 * eps + 1e-9, "llog {ll}: {composed}");
        }
    }

    #[test]
    fn subsample_degenerate_rate_keeps_everything() {
        let code = parallel_block_code(&[4, 4]).unwrap();
        let mut rng = substream(1, "sub-degenerate");
        let out = subsample_remaining(&code, 2, 100.0, 0.25, 10, &mut rng).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.coords.len(), 8);
        assert_eq!(out.weight, 1.0);
    }

    #[test]
    fn subsample_two_block_fixture() {
        // p = sqrt(40·2/500) = 0.4 on the 500-coordinate two-block code.
        let code = parallel_block_code(&[250, 250]).unwrap();
        let mut rng = substream(7, "sub-two-block");
        let out = subsample_remaining(&code, 2, 40.0, 0.25, 100, &mut rng).unwrap();
        assert!((out.p - 0.4).abs() < 1e-12);
        assert!(!out.degenerate);
        assert!(out.coords.len() < 500);
        let weight = out.weight;
        let mut mask = BitWord::zeros(500);
        for &i in &out.coords {
            mask.set(i, true);
        }
        for w in code.words() {
            let truth = w.weight() as f64;
            let value = w.and_weight(&mask) as f64 * weight;
            assert!((value - truth).abs() <= 0.25 * truth + 1e-9);
        }
    }

    #[test]
    fn subsample_acceptance_rate_matches_binomial_truth() {
        // Single word of weight 100 sampled at p = 0.5 (η = 25, CL = 1):
        // acceptance means the sampled count lies in [35, 65]. Compare the
        // empirical acceptance rate with the exact binomial mass and the
        // concentration floor 1 − 2e^{−0.38·ε²·ℓ·p}.
        let code = Code::new(100, vec![BitWord::ones(100)]).unwrap();
        let trials = 4000;
        let mut accepted = 0u32;
        for t in 0..trials {
            let mut rng = substream(t as u64, "sub-accept");
            if subsample_remaining(&code, 1, 25.0, 0.3, 1, &mut rng).is_ok() {
                accepted += 1;
            }
        }
        let exact: f64 = (35..=65)
            .map(|k| {
                let ln = ln_binom(100, k) + 100.0 * 0.5f64.ln();
                ln.exp()
            })
            .sum();
        let rate = accepted as f64 / trials as f64;
        let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((rate - exact).abs() <= 4.0 * sigma, "rate {rate} exact {exact}");
        let floor = 1.0 - 2.0 * (-0.38 * 0.09 * 100.0 * 0.5f64).exp();
        assert!(rate >= floor - 3.0 * sigma, "rate {rate} floor {floor}");
    }

    fn ln_binom(n: u64, k: u64) -> f64 {
        let lg = |x: u64| (1..=x).map(|i| (i as f64).ln()).sum::<f64>();
        lg(n) - lg(k) - lg(n - k)
    }

    #[test]
    fn theory_mode_retains_everything_at_desk_scale() {
        let code = parallel_block_code(&[250, 250]).unwrap();
        let params = SparsifyParams::theory(0.25, 3).with_cl_bound(2);
        let (w, report) = sparsify_unweighted(&code, &params).unwrap();
        assert_eq!(w.support_size(), 500);
        assert!(w.as_slice().iter().all(|&x| x == 1.0));
        assert_eq!(report.max_relative_error, 0.0);
        assert!(report.sampled_depths.is_empty());
        assert!(report.nodes.iter().all(|n| n.within_size_bound));
    }

    #[test]
    fn practical_mode_shrinks_two_block_fixture() {
        let code = parallel_block_code(&[250, 250]).unwrap();
        let params = SparsifyParams::practical(0.25, 11).with_cl_bound(2);
        let (w, report) = sparsify_unweighted(&code, &params).unwrap();
        let ones = WeightVector::uniform(500, 1.0);
        let v = verify_sparsifier(&code, &ones, &w, 0.25).unwrap();
        assert!(v.pass);
        assert!(
            w.support_size() <= 250,
            "support {} too large",
            w.support_size()
        );
        assert!(report.support_size == w.support_size());
    }

    #[test]
    fn sparsify_is_deterministic() {
        let code = parallel_block_code(&[100, 100]).unwrap();
        let params = SparsifyParams::practical(0.3, 99).with_cl_bound(2);
        let (w1, _) = sparsify_unweighted(&code, &params).unwrap();
        let (w2, _) = sparsify_unweighted(&code, &params).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn sparsify_rejects_bad_epsilon() {
        let code = parallel_block_code(&[4]).unwrap();
        for eps in [0.0, 1.0, 1.5] {
            let mut p = SparsifyParams::practical(eps, 0);
            p.epsilon = eps;
            assert!(sparsify_unweighted(&code, &p).is_err(), "eps {eps}");
        }
    }
}
