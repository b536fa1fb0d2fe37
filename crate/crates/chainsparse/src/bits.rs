//! Fixed-length bit vectors used as codewords.

use std::fmt;

use crate::error::{Error, Result};

const BLOCK_BITS: usize = 64;

/// A bit vector of fixed length. Bit `i` of the word is coordinate `i`;
/// coordinate 0 corresponds to the leftmost character of the bit-string
/// serialization.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    len: usize,
    blocks: Vec<u64>,
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            len,
            blocks: vec![0; len.div_ceil(BLOCK_BITS)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut w = Self::zeros(len);
        for b in w.blocks.iter_mut() {
            *b = u64::MAX;
        }
        w.mask_tail();
        w
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut w = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => w.set(i, true),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "bit-string may contain only 0/1, found {c:?}"
                    )))
                }
            }
        }
        Ok(w)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.blocks[i / BLOCK_BITS] >> (i % BLOCK_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let (b, o) = (i / BLOCK_BITS, i % BLOCK_BITS);
        if v {
            self.blocks[b] |= 1 << o;
        } else {
            self.blocks[b] &= !(1 << o);
        }
    }

    /// Number of ones (the word's weight).
    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Indices of the one-bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (bi, &b) in self.blocks.iter().enumerate() {
            let mut rem = b;
            while rem != 0 {
                let o = rem.trailing_zeros() as usize;
                out.push(bi * BLOCK_BITS + o);
                rem &= rem - 1;
            }
        }
        out
    }

    pub fn or_assign(&mut self, other: &BitWord) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    /// Popcount of `self & other`.
    pub fn and_weight(&self, other: &BitWord) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &BitWord) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    /// New word of length `keep.len()` whose bit `t` is `self.get(keep[t])`.
    pub fn gather(&self, keep: &[usize]) -> BitWord {
        let mut w = BitWord::zeros(keep.len());
        for (t, &i) in keep.iter().enumerate() {
            if self.get(i) {
                w.set(t, true);
            }
        }
        w
    }

    fn mask_tail(&mut self) {
        let tail = self.len % BLOCK_BITS;
        if tail != 0 {
            if let Some(last) = self.blocks.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitWord({})", self.to_bitstring())
        } else {
            write!(f, "BitWord(len={}, weight={})", self.len, self.weight())
        }
    }
}

/// A set of word indices, used by the exact searches to identify subcodes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    blocks: Vec<u64>,
}

impl IndexSet {
    pub fn full(n: usize) -> Self {
        let mut blocks = vec![u64::MAX; n.div_ceil(BLOCK_BITS)];
        let tail = n % BLOCK_BITS;
        if tail != 0 {
            if let Some(last) = blocks.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        IndexSet { blocks }
    }

    pub fn empty(n: usize) -> Self {
        IndexSet {
            blocks: vec![0; n.div_ceil(BLOCK_BITS)],
        }
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.blocks[i / BLOCK_BITS] |= 1 << (i % BLOCK_BITS);
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.blocks[i / BLOCK_BITS] >> (i % BLOCK_BITS) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &IndexSet) -> bool {
        self.blocks.iter().zip(&other.blocks).any(|(a, b)| a & b != 0)
    }

    /// `self & !other`.
    pub fn minus(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn and(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn remove_all(&mut self, other: &IndexSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn lowest(&self) -> Option<usize> {
        for (bi, &b) in self.blocks.iter().enumerate() {
            if b != 0 {
                return Some(bi * BLOCK_BITS + b.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &b)| {
            let mut rem = b;
            std::iter::from_fn(move || {
                if rem == 0 {
                    None
                } else {
                    let o = rem.trailing_zeros() as usize;
                    rem &= rem - 1;
                    Some(bi * BLOCK_BITS + o)
                }
            })
        })
    }
}
