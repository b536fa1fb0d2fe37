//! Weighted-code sparsification built on the unweighted sparsifier:
//! the bounded-weight duplication reduction, the weight-grouping reduction,
//! and the dimension-free repeated-application scheme.

use serde::Serialize;

use crate::bits::BitWord;
use crate::code::{Code, WeightVector, REL_TOLERANCE};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::sparsify::{compose_accuracy, sparsify_unweighted, Mode, SparsifyParams, SparsifyReport};
use crate::verify::{verify_sparsifier, VerificationReport};

/// The proof's "large constant Q" scaling the per-pass accuracy
/// `ε' = ε/(Q·log₂ m)` in the dimension-free recursion.
pub const THEORY_Q: f64 = 40.0;
/// Practical-mode Q, tuned so the loop actually shrinks desk-scale
/// instances instead of retaining everything.
pub const PRACTICAL_Q: f64 = 0.31;

/// Largest duplicated coordinate count the reduction will materialize.
const DUPLICATION_CAP: usize = 50_000_000;

pub fn default_q(mode: Mode) -> f64 {
    match mode {
        Mode::Theory => THEORY_Q,
        Mode::Practical => PRACTICAL_Q,
    }
}

fn relative_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// Copy counts `b(i) = ⌊2·w(i)/ε⌋` turning a bounded-weight code into an
/// unweighted one; the final scale `ε/2` undoes the expansion.
#[derive(Clone, Debug, Serialize)]
pub struct DuplicationPlan {
    pub copies: Vec<u64>,
    pub total: usize,
    pub scale: f64,
}

/// `weights` must already be normalized to minimum 1.
pub fn duplication_plan(weights: &[f64], epsilon: f64) -> Result<DuplicationPlan> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "duplication needs ε ∈ (0, 1], got {epsilon}"
        )));
    }
    let mut copies = Vec::with_capacity(weights.len());
    let mut total = 0usize;
    for &w in weights {
        if w < 1.0 - REL_TOLERANCE {
            return Err(Error::InvalidInput(
                "duplication expects weights normalized to minimum 1".into(),
            ));
        }
        let b = (2.0 * w / epsilon).floor() as u64;
        debug_assert!(b >= 1);
        total = total
            .checked_add(b as usize)
            .filter(|&t| t <= DUPLICATION_CAP)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "duplicated code would exceed {DUPLICATION_CAP} coordinates"
                ))
            })?;
        copies.push(b);
    }
    Ok(DuplicationPlan {
        copies,
        total,
        scale: epsilon / 2.0,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundedReport {
    pub epsilon: f64,
    /// Which branch ran: `identity`, `equal-weights`, or `duplication`.
    pub route: String,
    pub normalization: f64,
    pub duplicated_m: Option<usize>,
    pub inner: Option<SparsifyReport>,
    pub verification: VerificationReport,
    pub support_size: usize,
}

/// Sparsify a weighted code whose normalized weights are at most m³, by
/// duplicating coordinates proportionally to weight and sparsifying the
/// resulting unweighted code at accuracy ε/3.
///
/// Two shortcut branches: `ε ≤ 1/√m` returns the input unchanged (the code
/// is already within the target size), and exactly-uniform weights reduce
/// to the unweighted sparsifier by scale invariance.
pub fn sparsify_bounded_weights(
    code: &Code,
    w: &WeightVector,
    epsilon: f64,
    params: &SparsifyParams,
) -> Result<(WeightVector, BoundedReport)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if w.m() != code.m() {
        return Err(Error::InvalidInput("weight dimension mismatch".into()));
    }
    let m = code.m();
    let positive = w.support();
    if positive.is_empty() {
        let tilde = WeightVector::uniform(m, 0.0);
        let verification = verify_sparsifier(code, w, &tilde, epsilon)?;
        return Ok((
            tilde.clone(),
            BoundedReport {
                epsilon,
                route: "identity".into(),
                normalization: 1.0,
                duplicated_m: None,
                inner: None,
                verification,
                support_size: 0,
            },
        ));
    }
    let minw = positive.iter().map(|&i| w.get(i)).fold(f64::INFINITY, f64::min);
    let normalized: Vec<f64> = positive.iter().map(|&i| w.get(i) / minw).collect();
    let cap = (m as f64).powi(3);
    if let Some(&bad) = normalized
        .iter()
        .find(|&&x| x > cap * (1.0 + REL_TOLERANCE))
    {
        return Err(Error::InvalidInput(format!(
            "normalized weight {bad} exceeds m³ = {cap}"
        )));
    }
    if epsilon <= 1.0 / (m as f64).sqrt() {
        let verification = verify_sparsifier(code, w, w, epsilon)?;
        return Ok((
            w.clone(),
            BoundedReport {
                epsilon,
                route: "identity".into(),
                normalization: minw,
                duplicated_m: None,
                inner: None,
                verification,
                support_size: w.support_size(),
            },
        ));
    }
    let restricted = code.restrict(&positive)?.rebased();
    let mut out = vec![0.0; m];
    let (route, duplicated_m, inner) = if normalized.iter().all(|&x| relative_eq(x, 1.0)) {
        // All weights equal: a (1±ε) sparsifier of the unweighted code,
        // rescaled, is a (1±ε) sparsifier of the weighted one.
        let mut inner_params = params.clone();
        inner_params.epsilon = epsilon;
        inner_params.seed = derive_seed(params.seed, "bounded/equal");
        let (local, rep) = sparsify_unweighted(&restricted, &inner_params)?;
        for (j, &i) in positive.iter().enumerate() {
            out[i] = minw * local.get(j);
        }
        ("equal-weights".to_string(), None, Some(rep))
    } else {
        let plan = duplication_plan(&normalized, epsilon)?;
        let mut offsets = Vec::with_capacity(plan.copies.len() + 1);
        let mut acc = 0usize;
        for &b in &plan.copies {
            offsets.push(acc);
            acc += b as usize;
        }
        offsets.push(acc);
        let mut dup_words = Vec::with_capacity(restricted.word_count());
        for word in restricted.words() {
            let mut dw = BitWord::zeros(plan.total);
            for j in word.support() {
                for t in offsets[j]..offsets[j + 1] {
                    dw.set(t, true);
                }
            }
            dup_words.push(dw);
        }
        let dup_code = Code::new(plan.total, dup_words)?;
        let mut inner_params = params.clone();
        inner_params.epsilon = epsilon / 3.0;
        inner_params.seed = derive_seed(params.seed, "bounded/duplicated");
        let (dup_w, rep) = sparsify_unweighted(&dup_code, &inner_params)?;
        for (t, &x) in dup_w.as_slice().iter().enumerate() {
            if x != 0.0 {
                let j = offsets.partition_point(|&o| o <= t) - 1;
                out[positive[j]] += plan.scale * x * minw;
            }
        }
        ("duplication".to_string(), Some(plan.total), Some(rep))
    };
    let tilde = WeightVector::new(out)?;
    let verification = verify_sparsifier(code, w, &tilde, epsilon)?;
    if !verification.pass {
        return Err(Error::CertificateViolation(format!(
            "bounded-weight sparsifier exceeded ε = {epsilon}: max deviation {}",
            verification.max_relative_error
        )));
    }
    let support_size = tilde.support_size();
    Ok((
        tilde,
        BoundedReport {
            epsilon,
            route,
            normalization: minw,
            duplicated_m,
            inner,
            verification,
            support_size,
        },
    ))
}

fn derive_seed(seed: u64, label: &str) -> u64 {
    use rand::Rng;
    substream(seed, label).gen()
}

/// Coordinate grouping by weight scale: `t(i) = ⌊log w(i) / (3 log m)⌋`
/// after normalizing the minimum positive weight to 1.
#[derive(Clone, Debug, Serialize)]
pub struct WeightGrouping {
    /// Minimum positive weight, divided out before grouping.
    pub normalization: f64,
    /// Group index per coordinate; `None` for zero-weight coordinates.
    pub group_of: Vec<Option<i64>>,
    /// Coordinates per group, ascending.
    pub groups: std::collections::BTreeMap<i64, Vec<usize>>,
}

pub fn group_weights(w: &WeightVector) -> Result<WeightGrouping> {
    let positive = w.support();
    if positive.is_empty() {
        return Err(Error::InvalidInput(
            "weight grouping needs at least one positive weight".into(),
        ));
    }
    let m = w.m();
    let minw = positive.iter().map(|&i| w.get(i)).fold(f64::INFINITY, f64::min);
    let mut group_of = vec![None; m];
    let mut groups: std::collections::BTreeMap<i64, Vec<usize>> = Default::default();
    let denom = if m >= 2 { 3.0 * (m as f64).ln() } else { 1.0 };
    for &i in &positive {
        let x = (w.get(i) / minw).ln() / denom;
        // The 1e-9 nudge keeps exact powers (w = m^{3t}) in group t despite
        // floating-point log rounding.
        let t = (x + 1e-9).floor() as i64;
        group_of[i] = Some(t);
        groups.entry(t).or_default().push(i);
    }
    Ok(WeightGrouping {
        normalization: minw,
        group_of,
        groups,
    })
}

impl WeightGrouping {
    /// `type(c) = max group over the word's positive-weight support`.
    pub fn word_type(&self, word: &BitWord) -> Option<i64> {
        word.support()
            .into_iter()
            .filter_map(|i| self.group_of[i])
            .max()
    }

    /// Group `t` is proper iff some word of type `t` or `t+1` hits `I_t`.
    pub fn proper_groups(&self, code: &Code) -> std::collections::BTreeMap<i64, bool> {
        let types: Vec<Option<i64>> = code.words().iter().map(|w| self.word_type(w)).collect();
        self.groups
            .keys()
            .map(|&t| {
                let proper = code.words().iter().zip(&types).any(|(w, ty)| {
                    matches!(ty, Some(x) if *x == t || *x == t + 1)
                        && self.groups[&t].iter().any(|&i| w.get(i))
                });
                (t, proper)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupReport {
    pub t: i64,
    pub coords: usize,
    pub proper: bool,
    pub words: usize,
    pub bounded: Option<BoundedReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightedReport {
    pub epsilon: f64,
    /// Set when a shortcut returned early: `equal-weights` or `identity`.
    pub shortcut: Option<String>,
    pub groups: Vec<GroupReport>,
    pub verification: VerificationReport,
    pub support_size: usize,
}

/// Sparsify an arbitrarily weighted code by grouping coordinates into
/// weight scales, sparsifying each proper group (augmented with the
/// all-ones word over the group, which caps how much weight any group
/// coordinate can take) at accuracy ε/2, and summing the disjoint results.
///
/// Exactly-uniform weights delegate to the unweighted sparsifier by scale
/// invariance; otherwise `ε < 8/√m` returns the input unchanged.
pub fn sparsify_weighted(
    code: &Code,
    w: &WeightVector,
    epsilon: f64,
    params: &SparsifyParams,
) -> Result<(WeightVector, WeightedReport)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if w.m() != code.m() {
        return Err(Error::InvalidInput("weight dimension mismatch".into()));
    }
    let m = code.m();
    let positive = w.support();
    if positive.is_empty() {
        let tilde = WeightVector::uniform(m, 0.0);
        let verification = verify_sparsifier(code, w, &tilde, epsilon)?;
        return Ok((
            tilde.clone(),
            WeightedReport {
                epsilon,
                shortcut: Some("identity".into()),
                groups: vec![],
                verification,
                support_size: 0,
            },
        ));
    }
    let minw = positive.iter().map(|&i| w.get(i)).fold(f64::INFINITY, f64::min);
    if positive.iter().all(|&i| relative_eq(w.get(i) / minw, 1.0)) {
        let restricted = code.restrict(&positive)?.rebased();
        let mut inner_params = params.clone();
        inner_params.epsilon = epsilon;
        inner_params.seed = derive_seed(params.seed, "weighted/equal");
        let (local, _rep) = sparsify_unweighted(&restricted, &inner_params)?;
        let mut out = vec![0.0; m];
        for (j, &i) in positive.iter().enumerate() {
            out[i] = minw * local.get(j);
        }
        let tilde = WeightVector::new(out)?;
        let verification = verify_sparsifier(code, w, &tilde, epsilon)?;
        if !verification.pass {
            return Err(Error::CertificateViolation(format!(
                "uniform-weight sparsifier exceeded ε = {epsilon}: max deviation {}",
                verification.max_relative_error
            )));
        }
        let support_size = tilde.support_size();
        return Ok((
            tilde,
            WeightedReport {
                epsilon,
                shortcut: Some("equal-weights".into()),
                groups: vec![],
                verification,
                support_size,
            },
        ));
    }
    if epsilon < 8.0 / (m as f64).sqrt() {
        let verification = verify_sparsifier(code, w, w, epsilon)?;
        return Ok((
            w.clone(),
            WeightedReport {
                epsilon,
                shortcut: Some("identity".into()),
                groups: vec![],
                verification,
                support_size: w.support_size(),
            },
        ));
    }
    let grouping = group_weights(w)?;
    let proper = grouping.proper_groups(code);
    let types: Vec<Option<i64>> = code.words().iter().map(|x| grouping.word_type(x)).collect();
    let mut out = vec![0.0; m];
    let mut group_reports = Vec::new();
    for (&t, coords) in &grouping.groups {
        if !proper[&t] {
            group_reports.push(GroupReport {
                t,
                coords: coords.len(),
                proper: false,
                words: 0,
                bounded: None,
            });
            continue;
        }
        let member_words: Vec<BitWord> = code
            .words()
            .iter()
            .zip(&types)
            .filter(|(_, ty)| matches!(ty, Some(x) if *x == t || *x == t + 1))
            .map(|(wd, _)| wd.gather(coords))
            .collect();
        let word_count = member_words.len();
        let mut words = member_words;
        words.push(BitWord::ones(coords.len()));
        let sub_code = Code::new(coords.len(), words)?;
        let scale = (m as f64).powi(3).powi(t as i32);
        let group_w = WeightVector::new(
            coords
                .iter()
                .map(|&i| w.get(i) / grouping.normalization / scale)
                .collect(),
        )?;
        let mut sub_params = params.clone();
        sub_params.seed = derive_seed(params.seed, &format!("weighted/group/{t}"));
        let (group_tilde, brep) =
            sparsify_bounded_weights(&sub_code, &group_w, epsilon / 2.0, &sub_params)?;
        for (j, &i) in coords.iter().enumerate() {
            out[i] += group_tilde.get(j) * scale * grouping.normalization;
        }
        group_reports.push(GroupReport {
            t,
            coords: coords.len(),
            proper: true,
            words: word_count,
            bounded: Some(brep),
        });
    }
    let tilde = WeightVector::new(out)?;
    let verification = verify_sparsifier(code, w, &tilde, epsilon)?;
    if !verification.pass {
        return Err(Error::CertificateViolation(format!(
            "grouped sparsifier exceeded ε = {epsilon}: max deviation {}",
            verification.max_relative_error
        )));
    }
    let support_size = tilde.support_size();
    Ok((
        tilde,
        WeightedReport {
            epsilon,
            shortcut: None,
            groups: group_reports,
            verification,
            support_size,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DimFreePass {
    pub phase: String,
    pub index: usize,
    pub epsilon_pass: f64,
    pub support_in: usize,
    pub support_out: usize,
    pub measured_deviation: f64,
    pub shortcut: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimFreeReport {
    pub epsilon: f64,
    pub q: f64,
    pub cl_bound: usize,
    /// `CL/ε²`: the loop runs while `log₂(support) ≥` this.
    pub threshold_log2: f64,
    pub iteration_cap: usize,
    pub saturated: bool,
    pub passes: Vec<DimFreePass>,
    /// Composition of the measured per-pass deviations.
    pub composed_epsilon: f64,
    pub verification: VerificationReport,
    pub support_size: usize,
}

fn log_star(mut x: f64) -> usize {
    let mut n = 0;
    while x > 1.0 {
        x = x.log2();
        n += 1;
    }
    n
}

/// Repeatedly self-apply the weighted sparsifier so the final support
/// depends on the chain length and ε rather than on m: while the support
/// stays at least `2^{CL/ε²}`, sparsify at `ε' = ε/(Q·log₂ m)`; then one
/// more pass at that accuracy followed by one at `ε/2`.
///
/// Per-pass deviations are measured exhaustively and composed into the
/// certificate; passes that returned their input unchanged contribute zero.
pub fn sparsify_dimension_free(
    code: &Code,
    w: &WeightVector,
    epsilon: f64,
    params: &SparsifyParams,
    q: f64,
) -> Result<(WeightVector, DimFreeReport)> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "dimension-free recursion needs ε ∈ (0, 1/2], got {epsilon}"
        )));
    }
    if q <= 0.0 {
        return Err(Error::InvalidInput(format!("Q must be positive, got {q}")));
    }
    if w.m() != code.m() {
        return Err(Error::InvalidInput("weight dimension mismatch".into()));
    }
    let cl_bound = match params.cl_bound {
        Some(b) => b.max(1),
        None => {
            let positive = w.support();
            let restricted = code.restrict(&positive)?.rebased();
            match crate::chain::chain_length_exact(&restricted, params.cl_probe_budget) {
                Ok((v, _)) => v.max(1),
                Err(_) => crate::chain::chain_length_bounds(&restricted).1.max(1),
            }
        }
    };
    let threshold_log2 = cl_bound as f64 / (epsilon * epsilon);
    let above_threshold =
        |s: usize| -> bool { s >= 2 && (s as f64).log2() >= threshold_log2 - REL_TOLERANCE };
    let mut current = w.clone();
    let mut passes: Vec<DimFreePass> = Vec::new();
    let mut measured: Vec<f64> = Vec::new();
    let cap = log_star(code.support_size().max(2) as f64) + 3;
    let mut decreased_any = false;
    let mut saturated = false;
    let mut loop_entered = false;

    let pass_eps = |s: usize, q: f64| -> f64 {
        let l = (s.max(2) as f64).log2();
        (epsilon / (q * l)).min(0.9)
    };
    let run_pass = |phase: &str,
                        index: usize,
                        eps_pass: f64,
                        current: &WeightVector,
                        passes: &mut Vec<DimFreePass>,
                        measured: &mut Vec<f64>|
     -> Result<WeightVector> {
        let mut p = params.clone();
        p.seed = derive_seed(params.seed, &format!("dimfree/{phase}/{index}"));
        p.cl_bound = Some(cl_bound);
        let (next, rep) = sparsify_weighted(code, current, eps_pass, &p)?;
        passes.push(DimFreePass {
            phase: phase.into(),
            index,
            epsilon_pass: eps_pass,
            support_in: current.support_size(),
            support_out: next.support_size(),
            measured_deviation: rep.verification.max_relative_error,
            shortcut: rep.shortcut.clone(),
        });
        measured.push(rep.verification.max_relative_error);
        Ok(next)
    };

    for i in 0..cap {
        let s = current.support_size();
        if !above_threshold(s) {
            break;
        }
        loop_entered = true;
        let next = run_pass(
            "loop",
            i,
            pass_eps(s, q),
            &current,
            &mut passes,
            &mut measured,
        )?;
        if next.support_size() < s {
            decreased_any = true;
            current = next;
        } else {
            // An unengaged pass is deterministic in everything but the
            // seed-independent shortcuts, so iterating further cannot help.
            saturated = true;
            current = next;
            break;
        }
    }
    if loop_entered && !decreased_any && above_threshold(current.support_size()) {
        return Err(Error::Stagnation(format!(
            "no pass reduced the support ({} coordinates, threshold log₂ = {threshold_log2:.2}); \
             constants too large for this instance",
            current.support_size()
        )));
    }
    let s = current.support_size();
    current = run_pass("final-a", 0, pass_eps(s, q), &current, &mut passes, &mut measured)?;
    current = run_pass(
        "final-b",
        0,
        epsilon / 2.0,
        &current,
        &mut passes,
        &mut measured,
    )?;

    let composed = compose_accuracy(&measured);
    let verification = verify_sparsifier(code, w, &current, epsilon)?;
    if !verification.pass {
        return Err(Error::CertificateViolation(format!(
            "dimension-free sparsifier exceeded ε = {epsilon}: max deviation {}",
            verification.max_relative_error
        )));
    }
    let support_size = current.support_size();
    Ok((
        current,
        DimFreeReport {
            epsilon,
            q,
            cl_bound,
            threshold_log2,
            iteration_cap: cap,
            saturated,
            passes,
            composed_epsilon: composed,
            verification,
            support_size,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::parallel_block_code;

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

    #[test]
    fn duplication_plan_example() {
        // Unit weights at ε = 1/2 give four copies per coordinate.
        let plan = duplication_plan(&[1.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(plan.copies, vec![4, 4, 4]);
        assert_eq!(plan.total, 12);
        assert_eq!(plan.scale, 0.25);
    }

    #[test]
    fn duplication_fidelity_is_exact_arithmetic() {
        // (ε/2)·Σ b(i)·c_i ∈ (1 ± ε/2)·Σ w(i)·c_i, checked without any
        // randomness on assorted weights.
        let weights = [1.0, 1.7, 3.2, 10.0, 25.5];
        for eps in [0.1, 0.3, 0.5, 0.9] {
            let plan = duplication_plan(&weights, eps).unwrap();
            for mask in 1u32..1 << weights.len() {
                let dup: f64 = (0..weights.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| plan.copies[i] as f64)
                    .sum::<f64>()
                    * plan.scale;
                let true_val: f64 = (0..weights.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| weights[i])
                    .sum();
                assert!(dup <= true_val * (1.0 + 1e-12));
                assert!(dup >= true_val * (1.0 - eps / 2.0) - 1e-12);
            }
        }
    }

    #[test]
    fn grouping_examples() {
        let g = group_weights(&WeightVector::new(vec![1.0, 1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(g.groups.len(), 1);
        assert!(g.groups.contains_key(&0));

        // m = 10: 999 stays in group 0, 10⁶ lands in group 2.
        let mut w = vec![0.0; 10];
        w[0] = 1.0;
        w[1] = 999.0;
        w[2] = 1e6;
        let g = group_weights(&WeightVector::new(w).unwrap()).unwrap();
        assert_eq!(g.group_of[0], Some(0));
        assert_eq!(g.group_of[1], Some(0));
        assert_eq!(g.group_of[2], Some(2));

        // Weight exactly m³ sits on the group-1 boundary.
        let m = 10;
        let mut w = vec![0.0; m];
        w[0] = 1.0;
        w[1] = (m as f64).powi(3);
        let g = group_weights(&WeightVector::new(w).unwrap()).unwrap();
        assert_eq!(g.group_of[1], Some(1));
    }

    #[test]
    fn word_types_and_proper_groups() {
        // Two blocks in groups 0 and 2; the all-ones word has type 2.
        let code = code_from(4, &["1100", "0011", "1111"]);
        let m3 = 4f64.powi(3);
        let w = WeightVector::new(vec![1.0, 1.0, m3 * m3, m3 * m3]).unwrap();
        let g = group_weights(&w).unwrap();
        let low = BitWord::from_bitstring("1100").unwrap();
        let high = BitWord::from_bitstring("0011").unwrap();
        let ones = BitWord::from_bitstring("1111").unwrap();
        assert_eq!(g.word_type(&low), Some(0));
        assert_eq!(g.word_type(&high), Some(2));
        assert_eq!(g.word_type(&ones), Some(2));
        let proper = g.proper_groups(&code);
        assert_eq!(proper[&0], true); // 1100 has type 0 and hits I_0
        assert_eq!(proper[&2], true);
    }

    #[test]
    fn bounded_identity_below_sqrt_threshold() {
        let code = parallel_block_code(&[4, 4]).unwrap();
        let w = WeightVector::uniform(8, 2.0);
        let params = SparsifyParams::practical(0.3, 1);
        let (tilde, rep) = sparsify_bounded_weights(&code, &w, 0.3, &params).unwrap();
        assert_eq!(rep.route, "identity"); // 0.3 ≤ 1/√8 = 0.3536
        assert_eq!(tilde, w);
    }

    #[test]
    fn bounded_rejects_overweight() {
        let code = parallel_block_code(&[2, 2]).unwrap();
        let w = WeightVector::new(vec![1.0, 1.0, 1e9, 1e9]).unwrap();
        let params = SparsifyParams::practical(0.5, 1);
        assert!(sparsify_bounded_weights(&code, &w, 0.5, &params).is_err());
    }

    #[test]
    fn bounded_equal_weights_match_unweighted_run_scaled() {
        let code = parallel_block_code(&[100, 100]).unwrap();
        let w = WeightVector::uniform(200, 3.5);
        let params = SparsifyParams::practical(0.4, 21).with_cl_bound(2);
        let (tilde, rep) = sparsify_bounded_weights(&code, &w, 0.4, &params).unwrap();
        assert_eq!(rep.route, "equal-weights");
        assert!(rep.verification.pass);
        // Scale invariance: same run on the unweighted code, times 3.5.
        let mut unweighted_params = params.clone();
        unweighted_params.epsilon = 0.4;
        unweighted_params.seed = derive_seed(params.seed, "bounded/equal");
        let (plain, _) = sparsify_unweighted(&code, &unweighted_params).unwrap();
        for i in 0..200 {
            assert!((tilde.get(i) - 3.5 * plain.get(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn bounded_duplication_on_mixed_weights() {
        // Two-block code with weights alternating 1 and 3.
        let code = parallel_block_code(&[250, 250]).unwrap();
        let w = WeightVector::new((0..500).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect())
            .unwrap();
        let params = SparsifyParams::practical(0.5, 33).with_cl_bound(2);
        let (tilde, rep) = sparsify_bounded_weights(&code, &w, 0.5, &params).unwrap();
        assert_eq!(rep.route, "duplication");
        assert_eq!(rep.duplicated_m, Some(250 * 4 + 250 * 12));
        assert!(rep.verification.pass);
        let v = verify_sparsifier(&code, &w, &tilde, 0.5).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn weighted_identity_below_8_sqrt_threshold() {
        let code = code_from(4, &["1100", "0011", "1111"]);
        let w = WeightVector::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        let params = SparsifyParams::practical(0.5, 2);
        let (tilde, rep) = sparsify_weighted(&code, &w, 0.5, &params).unwrap();
        assert_eq!(rep.shortcut.as_deref(), Some("identity"));
        assert_eq!(tilde, w);
    }

    #[test]
    fn weighted_drops_zero_weight_coordinates() {
        // Theory constants retain everything that carries weight; the
        // zero-weight coordinates still never enter the output support.
        let code = code_from(6, &["110000", "001100", "111111"]);
        let w = WeightVector::new(vec![1.0, 0.0, 1.0, 1.0, 0.0, 1.0]).unwrap();
        let params = SparsifyParams::theory(0.5, 5);
        let (tilde, _) = sparsify_weighted(&code, &w, 0.5, &params).unwrap();
        assert_eq!(tilde.get(1), 0.0);
        assert_eq!(tilde.get(4), 0.0);
        assert_eq!(tilde.support_size(), 4);
    }

    #[test]
    fn weighted_three_group_instance_passes_exhaustively() {
        // One block per weight scale over m = 1024 plus the all-ones word;
        // ε = 0.5 clears the 8/√m threshold, so the grouped path runs.
        let m = 1024;
        let block = m / 3;
        let code = {
            let mut words = Vec::new();
            let mut b0 = BitWord::zeros(m);
            let mut b1 = BitWord::zeros(m);
            let mut b2 = BitWord::zeros(m);
            for i in 0..block {
                b0.set(i, true);
                b1.set(block + i, true);
                b2.set(2 * block + i, true);
            }
            for i in 3 * block..m {
                b2.set(i, true);
            }
            words.push(b0);
            words.push(b1);
            words.push(b2);
            words.push(BitWord::ones(m));
            Code::new(m, words).unwrap()
        };
        let m3 = (m as f64).powi(3);
        let w = WeightVector::new(
            (0..m)
                .map(|i| {
                    if i < block {
                        1.0
                    } else if i < 2 * block {
                        m3
                    } else {
                        m3 * m3
                    }
                })
                .collect(),
        )
        .unwrap();
        let params = SparsifyParams::practical(0.5, 7).with_cl_bound(3);
        let (tilde, rep) = sparsify_weighted(&code, &w, 0.5, &params).unwrap();
        assert!(rep.shortcut.is_none());
        assert!(rep.verification.pass);
        assert_eq!(rep.groups.len(), 3);
        assert!(rep.groups.iter().all(|g| g.proper));
        // Cross-group leakage: low groups contribute at most 2·m^{3t'+4}
        // per coordinate (the augmented all-ones word caps them).
        for g in &rep.groups {
            let cap = 2.0 * (m as f64).powi(3 * g.t as i32 + 4);
            for &i in &group_weights(&w).unwrap().groups[&g.t] {
                assert!(tilde.get(i) <= cap, "group {} coordinate {i}", g.t);
            }
        }
        let v = verify_sparsifier(&code, &w, &tilde, 0.5).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn dimfree_below_threshold_runs_exactly_two_passes() {
        let code = parallel_block_code(&[8, 8]).unwrap();
        let w = WeightVector::uniform(16, 1.0);
        // CL/ε² = 2/0.25 = 8 > log₂ 16 = 4: straight to the final passes.
        let params = SparsifyParams::practical(0.5, 3).with_cl_bound(2);
        let (_, rep) = sparsify_dimension_free(&code, &w, 0.5, &params, PRACTICAL_Q).unwrap();
        assert_eq!(rep.passes.len(), 2);
        assert!(rep.passes.iter().all(|p| p.phase.starts_with("final")));
    }

    #[test]
    fn dimfree_shrinks_block_code_and_certifies() {
        let m = 1 << 12;
        let code = parallel_block_code(&[m / 2, m / 2]).unwrap();
        let w = WeightVector::uniform(m, 1.0);
        let params = SparsifyParams::practical(0.5, 4101).with_cl_bound(2);
        let (tilde, rep) = sparsify_dimension_free(&code, &w, 0.5, &params, PRACTICAL_Q).unwrap();
        assert!(rep.verification.pass);
        assert!(rep.composed_epsilon <= 0.5 + 1e-9);
        assert!(tilde.support_size() < m / 2, "support {}", tilde.support_size());
    }

    #[test]
    fn dimfree_composed_error_series_stays_small() {
        // Numeric check of the pass-accuracy series 1/q + 1/2^(q/6) + …,
        // where the later denominators are the logs of the earlier (larger)
        // codes: m ≤ log⁶(m_prev) forces log(m_prev) ≥ 2^(log(m)/6). The
        // tower is summed while it keeps growing. The 2/q figure needs the
        // doubly-exponential regime, which starts around q ≈ 34; below
        // that the sum is still uniformly small.
        for q in 10..=60 {
            let mut total = 0.0;
            let mut t = q as f64;
            loop {
                total += 1.0 / t;
                let next = 2f64.powf(t / 6.0);
                if next <= t {
                    break;
                }
                t = next;
                if t > 1e15 {
                    total += 1.0 / t;
                    break;
                }
            }
            assert!(total <= 0.2 + 1e-12, "q = {q}: {total}");
            if q >= 34 {
                assert!(total <= 2.0 / q as f64, "q = {q}: {total}");
            }
        }
    }
}
