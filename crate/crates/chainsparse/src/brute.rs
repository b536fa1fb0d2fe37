//! Test-only brute-force oracles, kept independent of the implementations
//! they check. Exponential everywhere; only for tiny instances.

use crate::bits::BitWord;
use crate::code::Code;

/// Chain length by direct enumeration of injective map pairs: extend a
/// partial chain one position at a time, trying every (word, coordinate)
/// pair and re-checking the definition from scratch.
pub fn chain_length(code: &Code) -> usize {
    let words: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();
    let m = code.m();
    fn valid(chain: &[(usize, usize)], words: &[BitWord]) -> bool {
        for (i, &(wi, ci)) in chain.iter().enumerate() {
            if !words[wi].get(ci) {
                return false;
            }
            for &(_, cj) in chain.iter().skip(i + 1) {
                if words[wi].get(cj) {
                    return false;
                }
            }
        }
        true
    }
    fn extend(
        chain: &mut Vec<(usize, usize)>,
        used_w: &mut Vec<bool>,
        used_c: &mut Vec<bool>,
        words: &[BitWord],
        m: usize,
        best: &mut usize,
    ) {
        *best = (*best).max(chain.len());
        for wi in 0..words.len() {
            if used_w[wi] {
                continue;
            }
            for ci in 0..m {
                if used_c[ci] {
                    continue;
                }
                chain.push((wi, ci));
                if valid(chain, words) {
                    used_w[wi] = true;
                    used_c[ci] = true;
                    extend(chain, used_w, used_c, words, m, best);
                    used_w[wi] = false;
                    used_c[ci] = false;
                }
                chain.pop();
            }
        }
    }
    let mut best = 0;
    let mut chain = Vec::new();
    let mut used_w = vec![false; words.len()];
    let mut used_c = vec![false; m];
    extend(&mut chain, &mut used_w, &mut used_c, &words, m, &mut best);
    best
}

/// Non-redundancy by enumerating every coordinate subset.
pub fn nrd(code: &Code) -> usize {
    let m = code.m();
    assert!(m <= 16, "brute-force NRD is for tiny codes");
    let mut best = 0;
    for mask in 0u32..1 << m {
        let s: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let ok = s.iter().all(|&j| {
            code.words().iter().any(|w| {
                w.get(j) && s.iter().all(|&i| i == j || !w.get(i))
            })
        });
        if ok {
            best = best.max(s.len());
        }
    }
    best
}

/// Exact density: minimum of |Supp(C')| / CL(C') over nonempty subcodes,
/// as a (numerator, denominator) pair. `None` if no subcode has CL > 0.
pub fn density(code: &Code) -> Option<(usize, usize)> {
    let words: Vec<BitWord> = code
        .words()
        .iter()
        .filter(|w| !w.is_zero())
        .cloned()
        .collect();
    assert!(words.len() <= 16, "brute-force density is for tiny codes");
    let mut best: Option<(usize, usize)> = None;
    for mask in 1u32..1 << words.len() {
        let sub: Vec<BitWord> = (0..words.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| words[k].clone())
            .collect();
        let sub_code = Code::new(code.m(), sub).unwrap();
        let cl = chain_length(&sub_code);
        if cl == 0 {
            continue;
        }
        let supp = sub_code.support_size();
        let better = match best {
            None => true,
            Some((bn, bd)) => supp * bd < bn * cl,
        };
        if better {
            best = Some((supp, cl));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn oracle_sanity() {
        let tri = code_from(3, &["110", "101", "011", "000"]);
        assert_eq!(chain_length(&tri), 2);
        assert_eq!(nrd(&tri), 2);
        assert_eq!(density(&tri), Some((3, 2)));
        assert_eq!(density(&code_from(3, &["111"])), Some((3, 1)));
    }
}
