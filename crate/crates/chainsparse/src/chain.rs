//! Exact and bounded computation of chain length (CL), non-redundancy (NRD),
//! the union-closure chain formulation, and the cardinality bound
//! `|C| ≤ (m+1)^NRD ≤ (m+1)^CL`.
//!
//! A chain of length ℓ is a pair of injective maps `a: [ℓ] → coordinates`,
//! `c: [ℓ] → words` with `c(i)_{a(i)} = 1` and `c(i)_{a(j)} = 0` for `i < j`.
//! Peeling off the last element shows `CL(C) = 1 + max_i CL({c : c_i = 0})`
//! over support coordinates `i`, which is what the exact solver recurses on,
//! memoized on the surviving word set. No polynomial algorithm for CL is
//! known, so every exact search carries a node budget.

use std::collections::HashMap;

use serde::Serialize;

use crate::bits::{BitWord, IndexSet};
use crate::code::Code;
use crate::error::{Error, Result};

/// Default node budget for the exact branch-and-bound searches.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Hard cap on the union-closure size enumerated by
/// [`union_closure_chain_length`].
const CLOSURE_CAP: usize = 1 << 14;

/// Witness of a chain: position `k` (1-based in reports) uses coordinate
/// `coords[k-1]` and word `words[k-1]`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainWitness {
    pub coords: Vec<usize>,
    #[serde(serialize_with = "crate::chain::serialize_words")]
    pub words: Vec<BitWord>,
}

pub(crate) fn serialize_words<S: serde::Serializer>(
    words: &[BitWord],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(words.iter().map(|w| w.to_bitstring()))
}

impl ChainWitness {
    pub fn empty() -> Self {
        ChainWitness {
            coords: Vec::new(),
            words: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Re-validate the witness against its defining conditions.
    pub fn validate(&self, code: &Code) -> Result<()> {
        let l = self.coords.len();
        if self.words.len() != l {
            return Err(Error::InvalidInput("witness map lengths differ".into()));
        }
        let mut seen_coords = self.coords.clone();
        seen_coords.sort_unstable();
        seen_coords.dedup();
        if seen_coords.len() != l {
            return Err(Error::InvalidInput("coordinate map not injective".into()));
        }
        let mut seen_words = self.words.clone();
        seen_words.sort_unstable();
        seen_words.dedup();
        if seen_words.len() != l {
            return Err(Error::InvalidInput("word map not injective".into()));
        }
        for (i, w) in self.words.iter().enumerate() {
            if !code.contains(w) {
                return Err(Error::InvalidInput("witness word not in code".into()));
            }
            if !w.get(self.coords[i]) {
                return Err(Error::InvalidInput(format!(
                    "diagonal condition fails at position {}",
                    i + 1
                )));
            }
            for j in i + 1..l {
                if w.get(self.coords[j]) {
                    return Err(Error::InvalidInput(format!(
                        "zero condition fails at positions ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Witness of non-redundancy: each coordinate of `set` is privately hit by
/// the word stored at the same index.
#[derive(Clone, Debug, Serialize)]
pub struct NrdWitness {
    pub set: Vec<usize>,
    #[serde(serialize_with = "crate::chain::serialize_words")]
    pub witnesses: Vec<BitWord>,
}

impl NrdWitness {
    pub fn validate(&self, code: &Code) -> Result<()> {
        if self.set.len() != self.witnesses.len() {
            return Err(Error::InvalidInput("witness map lengths differ".into()));
        }
        for (k, &j) in self.set.iter().enumerate() {
            let w = &self.witnesses[k];
            if !code.contains(w) {
                return Err(Error::InvalidInput("witness word not in code".into()));
            }
            if !w.get(j) {
                return Err(Error::InvalidInput(format!(
                    "witness for coordinate {} misses it",
                    j + 1
                )));
            }
            for &i in &self.set {
                if i != j && w.get(i) {
                    return Err(Error::InvalidInput(format!(
                        "witness for coordinate {} hits coordinate {}",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-code context shared by the exact searches: nonzero words and the
/// deduplicated coordinate columns.
struct Columns {
    words: Vec<BitWord>,
    /// `(representative coordinate, word indices hit)`, ascending by
    /// coordinate. Coordinates with identical columns can appear in a chain
    /// at most once, so one representative suffices.
    cols: Vec<(usize, IndexSet)>,
}

impl Columns {
    fn build(code: &Code) -> Columns {
        let words: Vec<BitWord> = code
            .words()
            .iter()
            .filter(|w| !w.is_zero())
            .cloned()
            .collect();
        let n = words.len();
        let mut by_pattern: HashMap<IndexSet, usize> = HashMap::new();
        for i in code.support() {
            let mut hit = IndexSet::empty(n);
            for (k, w) in words.iter().enumerate() {
                if w.get(i) {
                    hit.insert(k);
                }
            }
            // Keep the lowest coordinate per distinct column pattern.
            by_pattern.entry(hit).or_insert(i);
        }
        let mut cols: Vec<(usize, IndexSet)> =
            by_pattern.into_iter().map(|(s, i)| (i, s)).collect();
        cols.sort_unstable_by_key(|(i, _)| *i);
        Columns { words, cols }
    }
}

struct ClSolver {
    ctx: Columns,
    memo: HashMap<IndexSet, u32>,
    nodes: u64,
    budget: u64,
}

impl ClSolver {
    /// Fully evaluates CL of the subcode given by `live`; `None` means the
    /// budget ran out.
    fn eval(&mut self, live: &IndexSet) -> Option<u32> {
        if live.is_empty() {
            return Some(0);
        }
        if let Some(&v) = self.memo.get(live) {
            return Some(v);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let mut best = 0u32;
        for ci in 0..self.ctx.cols.len() {
            if self.ctx.cols[ci].1.intersects(live) {
                let child = live.minus(&self.ctx.cols[ci].1);
                // Upper bound: a child of k words has CL ≤ k.
                if (child.count() as u32) < best {
                    continue;
                }
                best = best.max(1 + self.eval(&child)?);
            }
        }
        self.memo.insert(live.clone(), best);
        Some(best)
    }

    /// Rebuild one maximum chain from the filled memo table, breaking ties
    /// by ascending coordinate index. Positions are produced last-to-first.
    fn witness(&self, root: &IndexSet) -> ChainWitness {
        let mut rev: Vec<(usize, BitWord)> = Vec::new();
        let mut live = root.clone();
        loop {
            let l = if live.is_empty() {
                0
            } else {
                *self.memo.get(&live).expect("memo filled along optimal path")
            };
            if l == 0 {
                break;
            }
            let mut advanced = false;
            for (coord, col) in &self.ctx.cols {
                if !col.intersects(&live) {
                    continue;
                }
                let child = live.minus(col);
                let child_val = if child.is_empty() {
                    0
                } else {
                    match self.memo.get(&child) {
                        Some(&v) => v,
                        None => continue,
                    }
                };
                if child_val == l - 1 {
                    let k = col.and(&live).lowest().expect("intersection nonempty");
                    rev.push((*coord, self.ctx.words[k].clone()));
                    live = child;
                    advanced = true;
                    break;
                }
            }
            assert!(advanced, "memo walk must make progress");
        }
        rev.reverse();
        let (coords, words) = rev.into_iter().unzip();
        ChainWitness { coords, words }
    }
}

/// Exact chain length with one maximizing witness.
///
/// Branch-and-bound over "zero out one support coordinate" contractions,
/// memoized on the surviving word set. On budget exhaustion returns
/// [`Error::Inexact`] carrying the best lower bound found.
pub fn chain_length_exact(code: &Code, budget: u64) -> Result<(usize, ChainWitness)> {
    let ctx = Columns::build(code);
    if ctx.words.is_empty() {
        return Ok((0, ChainWitness::empty()));
    }
    let root = IndexSet::full(ctx.words.len());
    let mut solver = ClSolver {
        ctx,
        memo: HashMap::new(),
        nodes: 0,
        budget,
    };
    match solver.eval(&root) {
        Some(v) => {
            let witness = solver.witness(&root);
            debug_assert_eq!(witness.len(), v as usize);
            Ok((v as usize, witness))
        }
        None => {
            let greedy = greedy_chain(code);
            let partial_best = solver
                .memo
                .values()
                .copied()
                .max()
                .unwrap_or(0)
                .saturating_add(1) as usize;
            Err(Error::Inexact {
                lower: greedy.len().max(partial_best.min(solver.ctx.words.len())),
            })
        }
    }
}

/// Greedy chain witness, built by repeated contraction: pick a nonzero word
/// of minimum weight, take its lowest support coordinate as the next chain
/// element (filling positions last-to-first), and drop every word hitting
/// that coordinate.
pub fn greedy_chain(code: &Code) -> ChainWitness {
    let mut live: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();
    let mut rev: Vec<(usize, BitWord)> = Vec::new();
    while !live.is_empty() {
        let pick = live
            .iter()
            .enumerate()
            .min_by_key(|(_, w)| (w.weight(), (*w).clone()))
            .map(|(k, _)| k)
            .expect("nonempty");
        let word = live[pick].clone();
        let coord = word.support()[0];
        rev.push((coord, word));
        live.retain(|w| !w.get(coord));
    }
    rev.reverse();
    let (coords, words) = rev.into_iter().unzip();
    let w = ChainWitness { coords, words };
    debug_assert!(w.validate(code).is_ok());
    w
}

/// `(lower, upper)` bounds with `lower ≤ CL(C) ≤ upper`. Lower comes from
/// the greedy witness and the cardinality bound `CL ≥ log_{m+1} |C|`;
/// upper is `min(m, |Supp(C)|)`.
pub fn chain_length_bounds(code: &Code) -> (usize, usize) {
    let greedy = greedy_chain(code).len();
    let upper = code.support_size().min(code.m());
    let mut log_lower = 0usize;
    if code.m() > 0 && code.word_count() > 1 {
        let base = (code.m() + 1) as f64;
        log_lower = ((code.word_count() as f64).ln() / base.ln() - 1e-9).ceil() as usize;
    }
    (greedy.max(log_lower).min(upper), upper)
}

struct NrdSolver {
    cols: Vec<(usize, IndexSet)>,
    nodes: u64,
    budget: u64,
    /// Best feasible set found: `(column index, private witness word set)`.
    best: Vec<(usize, IndexSet)>,
    exhausted: bool,
}

impl NrdSolver {
    fn dfs(&mut self, idx: usize, chosen: &mut Vec<(usize, IndexSet)>) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if chosen.len() > self.best.len() {
            self.best = chosen.clone();
        }
        if idx == self.cols.len() || chosen.len() + (self.cols.len() - idx) <= self.best.len() {
            return;
        }
        // Include cols[idx] if every private-witness set stays nonempty:
        // old witnesses must avoid the new coordinate, and the new
        // coordinate needs a word avoiding all previously chosen ones.
        let col = self.cols[idx].1.clone();
        let mut next: Vec<(usize, IndexSet)> = Vec::with_capacity(chosen.len() + 1);
        let mut feasible = true;
        let mut new_set = col.clone();
        for (k, set) in chosen.iter() {
            let filtered = set.minus(&col);
            if filtered.is_empty() {
                feasible = false;
                break;
            }
            new_set = new_set.minus(&self.cols[*k].1);
            next.push((*k, filtered));
        }
        if feasible && !new_set.is_empty() {
            next.push((idx, new_set));
            self.dfs(idx + 1, &mut next);
        }
        self.dfs(idx + 1, chosen);
    }
}

/// Exact non-redundancy: the largest coordinate set in which every
/// coordinate is privately hit by some word.
pub fn nrd_exact(code: &Code, budget: u64) -> Result<(usize, NrdWitness)> {
    let ctx = Columns::build(code);
    // Full (non-deduplicated) columns are unnecessary: coordinates with
    // identical columns cannot coexist in a witness set either, since the
    // private word for one would hit the other.
    let mut solver = NrdSolver {
        cols: ctx.cols.clone(),
        nodes: 0,
        budget,
        best: Vec::new(),
        exhausted: false,
    };
    let mut chosen = Vec::new();
    solver.dfs(0, &mut chosen);
    let witness = NrdWitness {
        set: solver.best.iter().map(|(k, _)| solver.cols[*k].0).collect(),
        witnesses: solver
            .best
            .iter()
            .map(|(_, s)| ctx.words[s.lowest().expect("feasible set nonempty")].clone())
            .collect(),
    };
    if solver.exhausted {
        return Err(Error::Inexact {
            lower: witness.set.len(),
        });
    }
    debug_assert!(witness.validate(code).is_ok());
    Ok((witness.set.len(), witness))
}

/// Length of the longest strictly ascending chain of nonempty sets in the
/// closure of the code's supports under union. Equals `chain_length_exact`
/// on every code; the two are independent implementations and are checked
/// against each other by the test suite.
pub fn union_closure_chain_length(code: &Code) -> Result<usize> {
    let seeds: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();
    if seeds.len() > 20 {
        return Err(Error::InvalidInput(format!(
            "union closure requires at most 20 nonzero words, got {}",
            seeds.len()
        )));
    }
    let mut closure: Vec<BitWord> = Vec::new();
    let mut known: std::collections::HashSet<BitWord> = std::collections::HashSet::new();
    for w in &seeds {
        if known.insert(w.clone()) {
            closure.push(w.clone());
        }
    }
    let mut frontier: Vec<BitWord> = closure.clone();
    while let Some(x) = frontier.pop() {
        let snapshot: Vec<BitWord> = closure.clone();
        for y in snapshot {
            let mut u = x.clone();
            u.or_assign(&y);
            if known.insert(u.clone()) {
                if closure.len() + 1 > CLOSURE_CAP {
                    return Err(Error::InvalidInput(format!(
                        "union closure exceeds size limit {CLOSURE_CAP}"
                    )));
                }
                closure.push(u.clone());
                frontier.push(u);
            }
        }
    }
    // Longest chain in the containment order, DP over sets sorted by weight.
    closure.sort_unstable_by_key(|w| (w.weight(), w.clone()));
    let mut depth = vec![1usize; closure.len()];
    let mut best = 0usize;
    for i in 0..closure.len() {
        for j in 0..i {
            if closure[j].weight() < closure[i].weight() && closure[j].is_subset_of(&closure[i]) {
                depth[i] = depth[i].max(depth[j] + 1);
            }
        }
        best = best.max(depth[i]);
    }
    Ok(best)
}

/// Validator for `|C| ≤ (m+1)^NRD(C)`.
pub fn cardinality_bound_check(code: &Code, budget: u64) -> Result<bool> {
    let (nrd, _) = nrd_exact(code, budget)?;
    Ok(pow_at_least(
        (code.m() + 1) as u128,
        nrd as u32,
        code.word_count() as u128,
    ))
}

/// Whether `base^exp >= target`, with saturation on overflow.
pub(crate) fn pow_at_least(base: u128, exp: u32, target: u128) -> bool {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) => v,
            None => return true,
        };
        if acc >= target {
            return true;
        }
    }
    acc >= target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute;
    use crate::generators;

    fn code_from(m: usize, words: &[&str]) -> Code {
        Code::new(
            m,
            words
                .iter()
                .map(|s| BitWord::from_bitstring(s).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn identity_code(n: usize) -> Code {
        let mut words = Vec::new();
        for i in 0..n {
            let mut w = BitWord::zeros(n);
            w.set(i, true);
            words.push(w);
        }
        Code::new(n, words).unwrap()
    }

    #[test]
    fn cl_identity_code() {
        for n in 1..=6 {
            let (cl, w) = chain_length_exact(&identity_code(n), DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(cl, n);
            w.validate(&identity_code(n)).unwrap();
        }
    }

    #[test]
    fn cl_single_word() {
        let c = code_from(3, &["111"]);
        let (cl, w) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(cl, 1);
        w.validate(&c).unwrap();
    }

    #[test]
    fn cl_triangle_cut_code_matches_brute_force() {
        let c = code_from(3, &["110", "101", "011", "000"]);
        // Independent oracle: enumerate all injective map pairs.
        assert_eq!(brute::chain_length(&c), 2);
        let (cl, w) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(cl, 2);
        w.validate(&c).unwrap();
    }

    #[test]
    fn cl_zero_word_only() {
        let c = code_from(4, &["0000"]);
        assert_eq!(chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap().0, 0);
    }

    #[test]
    fn cl_budget_exhaustion_reports_lower_bound() {
        let c = generators::random_code(10, 30, 0.5, &mut crate::rng::substream(5, "cl-budget"))
            .unwrap();
        match chain_length_exact(&c, 3) {
            Err(Error::Inexact { lower }) => {
                let (exact, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
                assert!(lower <= exact);
                assert!(lower >= 1);
            }
            other => panic!("expected Inexact, got {other:?}"),
        }
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(chain_length_bounds(&identity_code(4)), (4, 4));
        let single = code_from(3, &["111"]);
        assert_eq!(chain_length_bounds(&single), (1, 3));
        let tri = code_from(3, &["110", "101", "011", "000"]);
        let (lo, hi) = chain_length_bounds(&tri);
        assert!(lo >= 1 && hi <= 3);
        let (cl, _) = chain_length_exact(&tri, DEFAULT_NODE_BUDGET).unwrap();
        assert!(lo <= cl && cl <= hi);
    }

    #[test]
    fn nrd_examples() {
        let (n, w) = nrd_exact(&identity_code(4), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(n, 4);
        w.validate(&identity_code(4)).unwrap();
        assert_eq!(nrd_exact(&code_from(3, &["111"]), DEFAULT_NODE_BUDGET).unwrap().0, 1);
        let tri = code_from(3, &["110", "101", "011", "000"]);
        assert_eq!(brute::nrd(&tri), 2);
        let (n, w) = nrd_exact(&tri, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(n, 2);
        w.validate(&tri).unwrap();
    }

    #[test]
    fn union_closure_examples() {
        assert_eq!(union_closure_chain_length(&identity_code(4)).unwrap(), 4);
        assert_eq!(union_closure_chain_length(&code_from(3, &["111"])).unwrap(), 1);
        let tri = code_from(3, &["110", "101", "011", "000"]);
        assert_eq!(union_closure_chain_length(&tri).unwrap(), 2);
        assert_eq!(union_closure_chain_length(&code_from(2, &["00"])).unwrap(), 0);
    }

    #[test]
    fn union_closure_rejects_large_codes() {
        let c = generators::random_code(30, 120, 0.5, &mut crate::rng::substream(1, "big")).unwrap();
        if c.nonzero_word_count() > 20 {
            assert!(union_closure_chain_length(&c).is_err());
        }
    }

    #[test]
    fn cardinality_bound_examples() {
        assert!(cardinality_bound_check(&identity_code(3), DEFAULT_NODE_BUDGET).unwrap());
        // Full cube on 3 coordinates: NRD = 3 and 8 ≤ 4^3.
        let mut words = Vec::new();
        for x in 0..8u32 {
            let mut w = BitWord::zeros(3);
            for b in 0..3 {
                if x >> b & 1 == 1 {
                    w.set(b, true);
                }
            }
            words.push(w);
        }
        let cube = Code::new(3, words).unwrap();
        let (n, _) = nrd_exact(&cube, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(n, 3);
        assert!(cardinality_bound_check(&cube, DEFAULT_NODE_BUDGET).unwrap());
        assert!(cardinality_bound_check(&code_from(5, &["11111"]), DEFAULT_NODE_BUDGET).unwrap());
    }

    #[test]
    fn nrd_never_exceeds_cl_on_random_codes() {
        for seed in 0..60 {
            let mut rng = crate::rng::substream(seed, "nrd-le-cl");
            let c = generators::random_code(6, 8, 0.4, &mut rng).unwrap();
            let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            let (nrd, _) = nrd_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            assert!(nrd <= cl, "NRD {nrd} > CL {cl} for seed {seed}");
        }
    }

    #[test]
    fn cl_equals_union_closure_on_random_codes() {
        for seed in 0..80 {
            let mut rng = crate::rng::substream(seed, "cl-eq-closure");
            let c = generators::random_code(5, 7, 0.5, &mut rng).unwrap();
            let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(cl, union_closure_chain_length(&c).unwrap(), "seed {seed}");
            assert_eq!(cl, brute::chain_length(&c), "brute mismatch at seed {seed}");
        }
    }

    #[test]
    fn cl_monotone_under_subcodes_and_restriction() {
        for seed in 0..40 {
            let mut rng = crate::rng::substream(seed, "cl-monotone");
            let c = generators::random_code(6, 9, 0.5, &mut rng).unwrap();
            let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            let half: Vec<BitWord> = c.words().iter().step_by(2).cloned().collect();
            let sub = c.subcode(half).unwrap();
            let (cl_sub, _) = chain_length_exact(&sub, DEFAULT_NODE_BUDGET).unwrap();
            assert!(cl_sub <= cl);
            let keep: Vec<usize> = (0..c.m()).step_by(2).collect();
            let r = c.restrict(&keep).unwrap();
            let (cl_r, _) = chain_length_exact(&r, DEFAULT_NODE_BUDGET).unwrap();
            assert!(cl_r <= cl);
        }
    }
}
