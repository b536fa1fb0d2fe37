//! Code density Φ(C), sparse-subcode search, and the peeling decomposition
//! with checkable certificates.
//!
//! `Φ(C) = min over subcodes C' of |Supp(C')| / CL(C')`. The definition
//! quantifies over all subcodes and no structure is known for the minimizer,
//! so exact mode enumerates word subsets (at most 20 nonzero words) and
//! heuristic mode searches a candidate family built around greedy chain
//! witnesses — chains are exactly the objects certifying large CL against
//! small support. A heuristic certificate `|Supp|/ℓ ≤ d` with `ℓ` a certified
//! lower bound on the subcode's CL is sound: the true ratio is only smaller.

use serde::Serialize;

use crate::bits::BitWord;
use crate::chain::{chain_length_exact, greedy_chain};
use crate::code::{Code, REL_TOLERANCE};
use crate::error::{Error, Result};
use crate::verify::counting_bound_audit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exact,
    Heuristic,
}

/// Most nonzero words exact density enumeration will accept (2^20 subsets).
pub const EXACT_DENSITY_WORD_LIMIT: usize = 20;

#[derive(Clone, Debug)]
pub struct DensityResult {
    pub phi: f64,
    /// Subcode attaining the reported ratio.
    pub witness: Option<Code>,
    /// True when `phi` is the true minimum; heuristic mode reports an upper
    /// bound on Φ.
    pub exact: bool,
}

/// A subcode whose density is certified to be at most some threshold.
#[derive(Clone, Debug)]
pub struct SparseSubcode {
    pub words: Vec<BitWord>,
    /// Local support of the subcode, ascending.
    pub support: Vec<usize>,
    /// Certified lower bound on the subcode's chain length (exact in exact
    /// mode and for chain-witness candidates).
    pub cl_certified: usize,
    pub cl_exact: bool,
}

impl SparseSubcode {
    pub fn ratio(&self) -> f64 {
        self.support.len() as f64 / self.cl_certified as f64
    }
}

/// Shared context for the exact subset enumeration: nonzero words plus a
/// chain-length table over word-subset masks, memoized across the whole
/// enumeration (subsets share contraction states).
struct ExactCtx {
    words: Vec<BitWord>,
    /// Deduplicated column hit-masks.
    cols: Vec<u32>,
    cl_memo: std::collections::HashMap<u32, u8>,
}

impl ExactCtx {
    fn build(code: &Code) -> Result<ExactCtx> {
        let words: Vec<BitWord> = code
            .words()
            .iter()
            .filter(|w| !w.is_zero())
            .cloned()
            .collect();
        if words.len() > EXACT_DENSITY_WORD_LIMIT {
            return Err(Error::InvalidInput(format!(
                "exact subcode enumeration limited to {EXACT_DENSITY_WORD_LIMIT} nonzero words, got {}",
                words.len()
            )));
        }
        let mut cols: Vec<u32> = Vec::new();
        for i in code.support() {
            let mut hit = 0u32;
            for (k, w) in words.iter().enumerate() {
                if w.get(i) {
                    hit |= 1 << k;
                }
            }
            if !cols.contains(&hit) {
                cols.push(hit);
            }
        }
        Ok(ExactCtx {
            words,
            cols,
            cl_memo: std::collections::HashMap::new(),
        })
    }

    fn cl(&mut self, mask: u32) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = self.cl_memo.get(&mask) {
            return v as usize;
        }
        let mut best = 0u8;
        for ci in 0..self.cols.len() {
            let col = self.cols[ci];
            if col & mask != 0 {
                let child = mask & !col;
                best = best.max(1 + self.cl(child) as u8);
            }
        }
        self.cl_memo.insert(mask, best);
        best as usize
    }

    fn supp_of(&self, mask: u32, m: usize) -> BitWord {
        let mut s = BitWord::zeros(m);
        for k in 0..self.words.len() {
            if mask >> k & 1 == 1 {
                s.or_assign(&self.words[k]);
            }
        }
        s
    }
}

/// The density Φ(C) with a witness subcode. Exact mode enumerates all
/// subsets of nonzero words; heuristic mode returns the best candidate
/// ratio, an upper bound on Φ.
pub fn density(code: &Code, mode: SearchMode) -> Result<DensityResult> {
    if code.support_size() == 0 {
        return Err(Error::InvalidInput(
            "density undefined: code has empty support".into(),
        ));
    }
    match mode {
        SearchMode::Exact => {
            let mut ctx = ExactCtx::build(code)?;
            let n = ctx.words.len();
            let mut best: Option<(usize, usize, u32)> = None; // (supp, cl, mask)
            for mask in 1u32..1 << n {
                let words_in = mask.count_ones() as usize;
                let supp = ctx.supp_of(mask, code.m()).weight();
                // CL ≤ #words, so supp/words_in lower-bounds the ratio.
                if let Some((bn, bd, _)) = best {
                    if supp * bd >= bn * words_in {
                        continue;
                    }
                }
                let cl = ctx.cl(mask);
                if cl == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bn, bd, _)) => supp * bd < bn * cl,
                };
                if better {
                    best = Some((supp, cl, mask));
                }
            }
            let (supp, cl, mask) = best.expect("nonempty support implies a nonzero word");
            let witness_words: Vec<BitWord> = (0..n)
                .filter(|&k| mask >> k & 1 == 1)
                .map(|k| ctx.words[k].clone())
                .collect();
            Ok(DensityResult {
                phi: supp as f64 / cl as f64,
                witness: Some(code.subcode(witness_words)?),
                exact: true,
            })
        }
        SearchMode::Heuristic => {
            let cands = heuristic_candidates(code);
            let best = cands
                .into_iter()
                .min_by(|a, b| a.ratio().total_cmp(&b.ratio()))
                .expect("nonempty support yields at least the whole-code candidate");
            Ok(DensityResult {
                phi: best.ratio(),
                witness: Some(code.subcode(best.words)?),
                exact: false,
            })
        }
    }
}

/// Candidate sparse subcodes: suffixes of the greedy chain (whose chain
/// lengths are known exactly), per-word support cones, and the whole code.
fn heuristic_candidates(code: &Code) -> Vec<SparseSubcode> {
    let mut out = Vec::new();
    let chain = greedy_chain(code);
    for start in 0..chain.len() {
        let words: Vec<BitWord> = chain.words[start..].to_vec();
        let mut supp = BitWord::zeros(code.m());
        for w in &words {
            supp.or_assign(w);
        }
        out.push(SparseSubcode {
            support: supp.support(),
            words,
            cl_certified: chain.len() - start,
            cl_exact: true,
        });
    }
    for w in code.words() {
        if w.is_zero() {
            continue;
        }
        let cone: Vec<BitWord> = code
            .words()
            .iter()
            .filter(|x| !x.is_zero() && x.is_subset_of(w))
            .cloned()
            .collect();
        if cone.len() < 2 {
            continue; // singleton cones duplicate chain suffixes of length 1
        }
        let sub = code.subcode(cone.clone()).expect("cone words are in the code");
        let lb = greedy_chain(&sub).len();
        out.push(SparseSubcode {
            support: w.support(),
            words: cone,
            cl_certified: lb,
            cl_exact: false,
        });
    }
    let nonzero: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();
    if !nonzero.is_empty() {
        let lb = greedy_chain(code).len();
        out.push(SparseSubcode {
            support: code.support(),
            words: nonzero,
            cl_certified: lb,
            cl_exact: false,
        });
    }
    out
}

/// Find a subcode with `|Supp| / CL ≤ d`, or `None`. In exact mode `None`
/// is authoritative (it certifies `Φ(C) > d`); in heuristic mode it is
/// advisory only.
pub fn find_sparse_subcode(code: &Code, d: f64, mode: SearchMode) -> Result<Option<SparseSubcode>> {
    if d <= 0.0 {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    if code.support_size() == 0 {
        return Ok(None);
    }
    match mode {
        SearchMode::Exact => {
            let mut ctx = ExactCtx::build(code)?;
            let n = ctx.words.len();
            for mask in 1u32..1 << n {
                let supp = ctx.supp_of(mask, code.m());
                let supp_size = supp.weight();
                let words_in = mask.count_ones() as usize;
                // CL ≤ #words: skip subsets that cannot reach ratio d.
                if supp_size as f64 > d * words_in as f64 + REL_TOLERANCE {
                    continue;
                }
                let cl = ctx.cl(mask);
                if cl > 0 && supp_size as f64 <= d * cl as f64 + REL_TOLERANCE {
                    let words: Vec<BitWord> = (0..n)
                        .filter(|&k| mask >> k & 1 == 1)
                        .map(|k| ctx.words[k].clone())
                        .collect();
                    return Ok(Some(SparseSubcode {
                        support: supp.support(),
                        words,
                        cl_certified: cl,
                        cl_exact: true,
                    }));
                }
            }
            Ok(None)
        }
        SearchMode::Heuristic => Ok(heuristic_candidates(code)
            .into_iter()
            .find(|c| c.support.len() as f64 <= d * c.cl_certified as f64 + REL_TOLERANCE)),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionRound {
    /// Peeled coordinates, as identities in the input code's space.
    pub support: Vec<usize>,
    pub support_size: usize,
    /// Certified lower bound on the peeled subcode's chain length.
    pub cl_certified: usize,
    pub cl_exact: bool,
}

/// Outcome of the peeling decomposition, with its certificates attached.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// All peeled coordinates (input-local), ascending.
    pub peeled: Vec<usize>,
    pub peel_code: Code,
    pub remaining_code: Code,
    pub d: f64,
    pub rounds: Vec<DecompositionRound>,
    /// Chain-length value the certificates were checked against (an upper
    /// bound on CL of the input code).
    pub cl_value: usize,
    /// True when the final "no sparse subcode" answer is authoritative.
    pub phi_authoritative: bool,
    /// `|T| ≤ CL·d`.
    pub size_ok: bool,
    /// Remainder counting bound, re-verified by enumeration.
    pub counting: crate::verify::CountingAudit,
}

/// Peel supports of density-≤`d` subcodes until none is found, then verify
/// the remainder's counting bound by enumeration. `cl_hint`, when given,
/// must upper-bound CL of the input code and avoids an exact solve.
pub fn decompose(
    code: &Code,
    d: f64,
    mode: SearchMode,
    cl_hint: Option<usize>,
    budget: u64,
) -> Result<DecompositionResult> {
    if d <= 0.0 {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    let cl_value = match cl_hint {
        Some(v) => v,
        None => match chain_length_exact(code, budget) {
            Ok((v, _)) => v,
            Err(Error::Inexact { .. }) => crate::chain::chain_length_bounds(code).1,
            Err(e) => return Err(e),
        },
    };
    // `active[j]` = input-local identity of remaining coordinate j.
    let mut active: Vec<usize> = (0..code.m()).collect();
    let mut remaining = code.rebased();
    let mut rounds = Vec::new();
    let mut peeled: Vec<usize> = Vec::new();
    let mut authoritative = true;
    loop {
        if remaining.support_size() == 0 {
            break;
        }
        match find_sparse_subcode(&remaining, d, mode)? {
            None => {
                authoritative = mode == SearchMode::Exact;
                break;
            }
            Some(sub) => {
                let in_input: Vec<usize> = sub.support.iter().map(|&j| active[j]).collect();
                rounds.push(DecompositionRound {
                    support_size: in_input.len(),
                    support: in_input.clone(),
                    cl_certified: sub.cl_certified,
                    cl_exact: sub.cl_exact,
                });
                peeled.extend(&in_input);
                let peel_set: std::collections::HashSet<usize> = sub.support.iter().copied().collect();
                let keep: Vec<usize> = (0..remaining.m())
                    .filter(|j| !peel_set.contains(j))
                    .collect();
                active = keep.iter().map(|&j| active[j]).collect();
                remaining = remaining.restrict(&keep)?;
            }
        }
    }
    peeled.sort_unstable();
    let complement: Vec<usize> = {
        let peel_set: std::collections::HashSet<usize> = peeled.iter().copied().collect();
        (0..code.m()).filter(|j| !peel_set.contains(j)).collect()
    };
    let peel_code = code.restrict(&peeled)?;
    let remaining_code = code.restrict(&complement)?;
    let size_ok = peeled.len() as f64 <= cl_value as f64 * d + REL_TOLERANCE;
    let counting = counting_bound_audit(&remaining_code, cl_value, d, cl_value.max(1));
    if !counting.pass {
        return Err(Error::CertificateViolation(format!(
            "remainder counting bound failed at d = {d} (cl = {cl_value}); {}",
            if mode == SearchMode::Heuristic {
                "the heuristic search missed a sparse subcode — rerun in exact mode"
            } else {
                "exact-mode invariant violated"
            }
        )));
    }
    Ok(DecompositionResult {
        peeled,
        peel_code,
        remaining_code,
        d,
        rounds,
        cl_value,
        phi_authoritative: authoritative,
        size_ok,
        counting,
    })
}

/// Check `CL(C|_T̄) ≤ CL(C) − CL(C')` for `T = Supp(C')`.
pub fn chain_additivity_check(code: &Code, subcode: &Code, budget: u64) -> Result<bool> {
    if subcode.m() != code.m() {
        return Err(Error::InvalidInput("subcode dimension mismatch".into()));
    }
    for w in subcode.words() {
        if !code.contains(w) {
            return Err(Error::InvalidInput("subcode word not in code".into()));
        }
    }
    let (cl_code, _) = chain_length_exact(code, budget)?;
    let (cl_sub, _) = chain_length_exact(subcode, budget)?;
    let t: std::collections::HashSet<usize> = subcode.support().into_iter().collect();
    let keep: Vec<usize> = (0..code.m()).filter(|j| !t.contains(j)).collect();
    let rest = code.restrict(&keep)?;
    let (cl_rest, _) = chain_length_exact(&rest, budget)?;
    Ok(cl_rest + cl_sub <= cl_code)
}
