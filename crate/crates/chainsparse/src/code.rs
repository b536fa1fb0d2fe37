//! Binary-code data model: codewords, coordinate restriction, support,
//! weights, and the sparsifier contract.

use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::error::{Error, Result};

/// Absolute floor added to every relative `(1 ± ε)` comparison to absorb
/// floating-point rounding.
pub const REL_TOLERANCE: f64 = 1e-12;

/// A deduplicated set of bit vectors over `m` coordinates.
///
/// Codes remember where their coordinates came from: `coords[j]` is the
/// identity of local coordinate `j` in the space the code was restricted
/// from. A freshly constructed code uses the identity map, and
/// [`Code::restrict`] composes the maps, so peeled and remaining parts can be
/// recombined over the original coordinates.
#[derive(Clone, PartialEq)]
pub struct Code {
    m: usize,
    coords: Vec<u32>,
    words: Vec<BitWord>,
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    m: usize,
    words: Vec<String>,
}

impl Code {
    /// Build a code over `m` coordinates. Duplicate words are merged; words
    /// are kept in a canonical sorted order.
    pub fn new(m: usize, words: Vec<BitWord>) -> Result<Self> {
        for w in &words {
            if w.len() != m {
                return Err(Error::InvalidInput(format!(
                    "word length {} does not match m = {m}",
                    w.len()
                )));
            }
        }
        let mut words = words;
        words.sort_unstable();
        words.dedup();
        Ok(Code {
            m,
            coords: (0..m as u32).collect(),
            words,
        })
    }

    fn with_coords(m: usize, coords: Vec<u32>, mut words: Vec<BitWord>) -> Self {
        debug_assert_eq!(coords.len(), m);
        words.sort_unstable();
        words.dedup();
        Code { m, coords, words }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn words(&self) -> &[BitWord] {
        &self.words
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn nonzero_word_count(&self) -> usize {
        self.words.iter().filter(|w| !w.is_zero()).count()
    }

    pub fn contains(&self, w: &BitWord) -> bool {
        self.words.binary_search(w).is_ok()
    }

    /// Identity of each local coordinate in the space this code was
    /// restricted from.
    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// Same words, coordinate identities reset to `0..m`.
    pub fn rebased(&self) -> Code {
        Code {
            m: self.m,
            coords: (0..self.m as u32).collect(),
            words: self.words.clone(),
        }
    }

    /// Local coordinates hit by at least one word, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut hit = BitWord::zeros(self.m);
        for w in &self.words {
            hit.or_assign(w);
        }
        hit.support()
    }

    pub fn support_size(&self) -> usize {
        self.support().len()
    }

    /// Coordinate restriction `C|_keep`. `keep` must be strictly increasing
    /// local coordinates; words merged by restriction are deduplicated and
    /// the coordinate identity map is composed.
    pub fn restrict(&self, keep: &[usize]) -> Result<Code> {
        let mut prev: Option<usize> = None;
        for &i in keep {
            if i >= self.m {
                return Err(Error::InvalidInput(format!(
                    "restriction coordinate {i} out of range (m = {})",
                    self.m
                )));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(Error::InvalidInput(
                    "restriction coordinates must be strictly increasing".into(),
                ));
            }
            prev = Some(i);
        }
        let coords = keep.iter().map(|&i| self.coords[i]).collect();
        let words = self.words.iter().map(|w| w.gather(keep)).collect();
        Ok(Code::with_coords(keep.len(), coords, words))
    }

    /// The subcode consisting of the given words, over the same coordinates.
    pub fn subcode(&self, words: Vec<BitWord>) -> Result<Code> {
        for w in &words {
            if !self.contains(w) {
                return Err(Error::InvalidInput("subcode word not in code".into()));
            }
        }
        Ok(Code::with_coords(self.m, self.coords.clone(), words))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CodeJson {
            m: self.m,
            words: self.words.iter().map(|w| w.to_bitstring()).collect(),
        })
        .expect("code serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Code> {
        let j: CodeJson = serde_json::from_str(s)?;
        let words = j
            .words
            .iter()
            .map(|w| BitWord::from_bitstring(w))
            .collect::<Result<Vec<_>>>()?;
        Code::new(j.m, words)
    }
}

impl std::fmt::Debug for Code {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Code(m={}, |C|={})", self.m, self.words.len())
    }
}

/// Nonnegative per-coordinate weights; a sparsifier is just another
/// weight vector.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    m: usize,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightsJson {
    m: usize,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        for (i, &x) in w.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weight {x} at coordinate {} must be finite and nonnegative",
                    i + 1
                )));
            }
        }
        Ok(WeightVector { m: w.len(), w })
    }

    pub fn uniform(m: usize, value: f64) -> Self {
        WeightVector {
            m,
            w: vec![value; m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w[i]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    /// Coordinates with nonzero weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.m).filter(|&i| self.w[i] != 0.0).collect()
    }

    pub fn support_size(&self) -> usize {
        self.w.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WeightsJson {
            m: self.m,
            weights: self.w.clone(),
        })
        .expect("weight serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<WeightVector> {
        let j: WeightsJson = serde_json::from_str(s)?;
        if j.weights.len() != j.m {
            return Err(Error::InvalidInput(format!(
                "weights length {} does not match m = {}",
                j.weights.len(),
                j.m
            )));
        }
        WeightVector::new(j.weights)
    }
}

/// Inner product `Σ w(i)·c_i` of a codeword with a weight vector.
pub fn weighted_value(word: &BitWord, w: &WeightVector) -> Result<f64> {
    if word.len() != w.m() {
        return Err(Error::InvalidInput(format!(
            "word length {} does not match weight dimension {}",
            word.len(),
            w.m()
        )));
    }
    Ok(word.support().iter().map(|&i| w.get(i)).sum())
}

/// Outcome of checking the sparsifier contract `⟨w̃, c⟩ ∈ (1 ± ε)·⟨w, c⟩`
/// over every distinct word of a code. The zero word imposes no constraint.
#[derive(Clone, Debug, Serialize)]
pub struct SparsifierCertificate {
    pub epsilon: f64,
    pub max_relative_error: f64,
    pub support_size: usize,
    pub valid: bool,
}

impl SparsifierCertificate {
    pub fn check(code: &Code, w: &WeightVector, tilde: &WeightVector, epsilon: f64) -> Result<Self> {
        let report = crate::verify::verify_sparsifier(code, w, tilde, epsilon)?;
        Ok(SparsifierCertificate {
            epsilon,
            max_relative_error: report.max_relative_error,
            support_size: tilde.support_size(),
            valid: report.pass,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn code_from(m: usize, words: &[&str]) -> Code {
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
    fn restrict_identity_projection() {
        // I3 restricted to the first two coordinates merges nothing here:
        // {100, 010, 001} -> {10, 01, 00}.
        let c = code_from(3, &["100", "010", "001"]);
        let r = c.restrict(&[0, 1]).unwrap();
        assert_eq!(r.word_count(), 3);
        assert!(r.contains(&BitWord::from_bitstring("10").unwrap()));
        assert!(r.contains(&BitWord::from_bitstring("01").unwrap()));
        assert!(r.contains(&BitWord::from_bitstring("00").unwrap()));
        assert_eq!(r.coords(), &[0, 1]);
    }

    #[test]
    fn restrict_to_everything_is_identity() {
        let c = code_from(4, &["1010", "0110", "0001"]);
        let r = c.restrict(&[0, 1, 2, 3]).unwrap();
        assert_eq!(r, c);
    }

    #[test]
    fn restrict_triangle_cut_code_to_first_coordinate() {
        // Cut code of the triangle restricted to one edge: {1, 0}.
        let c = code_from(3, &["110", "101", "011", "000"]);
        let r = c.restrict(&[0]).unwrap();
        assert_eq!(r.word_count(), 2);
        assert!(r.contains(&BitWord::from_bitstring("1").unwrap()));
        assert!(r.contains(&BitWord::from_bitstring("0").unwrap()));
    }

    #[test]
    fn restrict_rejects_out_of_range() {
        let c = code_from(3, &["111"]);
        assert!(matches!(c.restrict(&[3]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn support_examples() {
        assert!(code_from(3, &["000"]).support().is_empty());
        assert_eq!(code_from(3, &["100", "010", "001"]).support(), vec![0, 1, 2]);
        assert_eq!(code_from(3, &["110", "010"]).support(), vec![0, 1]);
    }

    #[test]
    fn weighted_value_examples() {
        let w = WeightVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        let c = BitWord::from_bitstring("111").unwrap();
        assert_eq!(weighted_value(&c, &w).unwrap(), 3.0);
        let z = BitWord::from_bitstring("000").unwrap();
        assert_eq!(weighted_value(&z, &w).unwrap(), 0.0);
        let w2 = WeightVector::new(vec![2.0, 5.0, 0.5]).unwrap();
        let c2 = BitWord::from_bitstring("101").unwrap();
        assert_eq!(weighted_value(&c2, &w2).unwrap(), 2.5);
        assert!(weighted_value(&c2, &w).is_ok());
        let short = WeightVector::new(vec![1.0]).unwrap();
        assert!(weighted_value(&c2, &short).is_err());
    }

    #[test]
    fn weights_reject_negative() {
        assert!(WeightVector::new(vec![1.0, -0.5]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn code_json_round_trip() {
        let c = code_from(4, &["1010", "0001", "0000"]);
        let c2 = Code::from_json(&c.to_json()).unwrap();
        assert_eq!(c, c2);
    }

    #[test]
    fn weights_json_round_trip() {
        let w = WeightVector::new(vec![0.0, 1.5, 2.0]).unwrap();
        let w2 = WeightVector::from_json(&w.to_json()).unwrap();
        assert_eq!(w, w2);
        assert_eq!(w2.support(), vec![1, 2]);
    }

    #[test]
    fn restriction_coordinates_compose() {
        let c = code_from(5, &["11010", "00111"]);
        let r1 = c.restrict(&[1, 2, 4]).unwrap();
        let r2 = r1.restrict(&[0, 2]).unwrap();
        // Local coordinates {0, 2} of r1 are original coordinates {1, 4}.
        assert_eq!(r2.coords(), &[1, 4]);
        let direct = c.restrict(&[1, 4]).unwrap();
        assert_eq!(r2, direct);
    }
}
