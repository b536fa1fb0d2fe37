//! Multiplicative sparsification of set systems represented as binary codes.
//!
//! A set system over `m` atoms is stored as a deduplicated set of bit vectors
//! (a *code*). A `(1 ± ε)` sparsifier is a reweighting of the coordinates so
//! that every codeword's weighted size is preserved up to relative error ε.
//! The size of the smallest such reweighting is governed by the *chain length*
//! of the code, in the same way VC dimension governs additive approximation.
//!
//! The crate provides:
//!
//! * exact (branch-and-bound) chain length, non-redundancy, union-closure
//!   chain length, and code density, all at desk scale;
//! * the randomized contraction procedure and Monte Carlo validation of its
//!   survival bound;
//! * the peeling decomposition with checkable counting-bound certificates;
//! * the recursive peel-and-subsample sparsifier for unweighted codes and the
//!   weighted reductions on top of it (duplication, weight grouping, and the
//!   dimension-free repeated-application scheme);
//! * generators for benchmark codes (graph cut codes, supports of linear
//!   codes over small prime fields, parallel block codes, random codes);
//! * exhaustive and sampled verification plus counting-bound audits.
//!
//! Everything is deterministic given a 64-bit seed; randomness flows through
//! named substreams (see [`rng`]).

pub mod bits;
pub mod chain;
pub mod code;
pub mod contraction;
pub mod density;
pub mod error;
pub mod generators;
pub mod rng;
pub mod sparsify;
pub mod verify;
pub mod weighted;

pub use bits::BitWord;
pub use code::{Code, SparsifierCertificate, WeightVector};
pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod brute;
