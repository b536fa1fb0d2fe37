//! Benchmark code constructions: graph cut codes, supports of linear codes
//! over small prime fields, parallel block codes, and random instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitWord;
use crate::code::Code;
use crate::error::{Error, Result};

/// Undirected graph given as a deduplicated edge list over vertices `1..=n`.
#[derive(Clone, Debug)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub weights: Option<Vec<f64>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, weights: Option<Vec<f64>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInput(format!("duplicate edge ({u}, {v})")));
            }
        }
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(Error::InvalidInput(
                    "edge weight count does not match edge count".into(),
                ));
            }
        }
        Ok(Graph { n, edges, weights })
    }

    /// Parse the whitespace-separated edge-list format: a header line
    /// `n m` followed by `m` lines `u v [w]`.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty graph file".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = parse_tok(it.next(), "vertex count")?;
        let m: usize = parse_tok(it.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        let mut weights: Vec<f64> = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let u: usize = parse_tok(it.next(), "edge endpoint")?;
            let v: usize = parse_tok(it.next(), "edge endpoint")?;
            edges.push((u, v));
            if let Some(tok) = it.next() {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad edge weight {tok:?}")))?;
                weights.push(w);
            }
        }
        if edges.len() != m {
            return Err(Error::InvalidInput(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        let weights = if weights.is_empty() {
            None
        } else if weights.len() == edges.len() {
            Some(weights)
        } else {
            return Err(Error::InvalidInput(
                "either all edges or none may carry weights".into(),
            ));
        };
        Graph::new(n, edges, weights)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (k, &(u, v)) in self.edges.iter().enumerate() {
            match &self.weights {
                Some(w) => out.push_str(&format!("{u} {v} {}\n", w[k])),
                None => out.push_str(&format!("{u} {v}\n")),
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..=self.n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                p[x] = find(p, p[x]);
            }
            p[x]
        }
        for &(u, v) in &self.edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            parent[ru] = rv;
        }
        let root = find(&mut parent, 1);
        (2..=self.n).all(|v| find(&mut parent, v) == root)
    }
}

fn parse_tok<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::InvalidInput(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad {what}")))
}

/// Generator matrix of a linear code over a prime field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearCodeSpec {
    pub q: u32,
    pub rows: Vec<Vec<u32>>,
}

impl LinearCodeSpec {
    pub fn validate(&self) -> Result<(usize, usize)> {
        if ![2, 3, 5, 7].contains(&self.q) {
            return Err(Error::InvalidInput(format!(
                "field order must be a prime ≤ 7, got {}",
                self.q
            )));
        }
        let k = self.rows.len();
        let m = self.rows.first().map_or(0, |r| r.len());
        for r in &self.rows {
            if r.len() != m {
                return Err(Error::InvalidInput("ragged generator matrix".into()));
            }
            if r.iter().any(|&x| x >= self.q) {
                return Err(Error::InvalidInput("matrix entry out of field range".into()));
            }
        }
        Ok((k, m))
    }

    /// Rank over F_q by Gaussian elimination in exact modular arithmetic.
    pub fn rank(&self) -> Result<usize> {
        let (k, m) = self.validate()?;
        let q = self.q as u64;
        let mut a: Vec<Vec<u64>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| x as u64).collect())
            .collect();
        let mut rank = 0;
        for col in 0..m {
            let Some(pivot) = (rank..k).find(|&r| a[r][col] != 0) else {
                continue;
            };
            a.swap(rank, pivot);
            let inv = mod_inverse(a[rank][col], q);
            for x in a[rank].iter_mut() {
                *x = *x * inv % q;
            }
            for r in 0..k {
                if r != rank && a[r][col] != 0 {
                    let f = a[r][col];
                    for c in 0..m {
                        a[r][c] = (a[r][c] + (q - f) * a[rank][c]) % q;
                    }
                }
            }
            rank += 1;
            if rank == k {
                break;
            }
        }
        Ok(rank)
    }
}

fn mod_inverse(x: u64, q: u64) -> u64 {
    // Fermat: x^(q-2) mod q for prime q.
    let mut acc = 1u64;
    let mut base = x % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        e >>= 1;
    }
    acc
}

/// Cut code of a graph: one word per vertex subset, marking the edges it
/// cuts. Complementary subsets give the same cut, so only subsets containing
/// vertex 1 are enumerated; the zero word (empty cut) is kept.
pub fn cut_code(graph: &Graph) -> Result<Code> {
    if graph.n > 24 {
        return Err(Error::InvalidInput(format!(
            "cut enumeration limited to 24 vertices, got {}",
            graph.n
        )));
    }
    if graph.n == 0 {
        return Code::new(graph.edges.len(), vec![]);
    }
    let m = graph.edges.len();
    let mut words = Vec::with_capacity(1usize << (graph.n - 1));
    for bits in 0u32..1 << (graph.n - 1) {
        // Vertex 1 always inside; vertex v > 1 inside iff its bit is set.
        let in_side = |v: usize| v == 1 || bits >> (v - 2) & 1 == 1;
        let mut w = BitWord::zeros(m);
        for (k, &(u, v)) in graph.edges.iter().enumerate() {
            if in_side(u) != in_side(v) {
                w.set(k, true);
            }
        }
        words.push(w);
    }
    Code::new(m, words)
}

/// The 0/1 support indicators of all codewords of the linear code generated
/// by `spec.rows`, deduplicated.
pub fn linear_support_code(spec: &LinearCodeSpec) -> Result<Code> {
    let (k, m) = spec.validate()?;
    let total = (spec.q as u64).checked_pow(k as u32);
    match total {
        Some(t) if t <= 1 << 20 => {}
        _ => {
            return Err(Error::InvalidInput(format!(
                "codeword enumeration limited to 2^20, need {}^{k}",
                spec.q
            )))
        }
    }
    let q = spec.q as u64;
    let mut coeff = vec![0u64; k];
    let mut words = Vec::new();
    loop {
        let mut w = BitWord::zeros(m);
        for c in 0..m {
            let mut acc = 0u64;
            for r in 0..k {
                acc = (acc + coeff[r] * spec.rows[r][c] as u64) % q;
            }
            if acc != 0 {
                w.set(c, true);
            }
        }
        words.push(w);
        // Odometer over coefficient vectors.
        let mut pos = 0;
        while pos < k {
            coeff[pos] += 1;
            if coeff[pos] < q {
                break;
            }
            coeff[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    Code::new(m, words)
}

/// Blocks of parallel coordinates: one indicator word per block plus the
/// all-ones word. Chain length equals the number of blocks.
pub fn parallel_block_code(block_sizes: &[usize]) -> Result<Code> {
    if block_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidInput("block sizes must be positive".into()));
    }
    let m: usize = block_sizes.iter().sum();
    let mut words = Vec::with_capacity(block_sizes.len() + 1);
    let mut offset = 0;
    for &s in block_sizes {
        let mut w = BitWord::zeros(m);
        for i in offset..offset + s {
            w.set(i, true);
        }
        words.push(w);
        offset += s;
    }
    words.push(BitWord::ones(m));
    Code::new(m, words)
}

/// `count` i.i.d. Bernoulli(`density`) words, deduplicated.
pub fn random_code<R: Rng>(m: usize, count: usize, density: f64, rng: &mut R) -> Result<Code> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidInput(format!(
            "density must lie in [0, 1], got {density}"
        )));
    }
    let mut words = Vec::with_capacity(count);
    for _ in 0..count {
        let mut w = BitWord::zeros(m);
        for i in 0..m {
            if rng.gen_bool(density) {
                w.set(i, true);
            }
        }
        words.push(w);
    }
    Code::new(m, words)
}

/// Erdős–Rényi graph: each vertex pair is an edge independently with
/// probability `p`.
pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{chain_length_exact, DEFAULT_NODE_BUDGET};
    use crate::rng::substream;

    #[test]
    fn triangle_cut_code() {
        let g = Graph::new(3, vec![(1, 2), (1, 3), (2, 3)], None).unwrap();
        let c = cut_code(&g).unwrap();
        assert_eq!(c.m(), 3);
        assert_eq!(c.word_count(), 4);
        for w in ["000", "110", "101", "011"] {
            assert!(c.contains(&BitWord::from_bitstring(w).unwrap()), "{w}");
        }
    }

    #[test]
    fn single_edge_cut_code() {
        let g = Graph::new(2, vec![(1, 2)], None).unwrap();
        let c = cut_code(&g).unwrap();
        assert_eq!(c.word_count(), 2);
    }

    #[test]
    fn path_cut_code() {
        let g = Graph::new(3, vec![(1, 2), (2, 3)], None).unwrap();
        let c = cut_code(&g).unwrap();
        assert_eq!(c.word_count(), 4);
        for w in ["00", "10", "01", "11"] {
            assert!(c.contains(&BitWord::from_bitstring(w).unwrap()), "{w}");
        }
    }

    #[test]
    fn linear_support_examples() {
        // Identity generator over F2: all of {0,1}^k.
        let spec = LinearCodeSpec {
            q: 2,
            rows: vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
        };
        assert_eq!(linear_support_code(&spec).unwrap().word_count(), 8);

        let spec = LinearCodeSpec {
            q: 2,
            rows: vec![vec![1, 1, 1]],
        };
        let c = linear_support_code(&spec).unwrap();
        assert_eq!(c.word_count(), 2);
        assert!(c.contains(&BitWord::from_bitstring("111").unwrap()));

        let spec = LinearCodeSpec {
            q: 2,
            rows: vec![vec![1, 1, 0], vec![0, 1, 1]],
        };
        let c = linear_support_code(&spec).unwrap();
        assert_eq!(c.word_count(), 4);
        for w in ["000", "110", "011", "101"] {
            assert!(c.contains(&BitWord::from_bitstring(w).unwrap()), "{w}");
        }
    }

    #[test]
    fn block_code_examples() {
        let c = parallel_block_code(&[1]).unwrap();
        assert_eq!(c.word_count(), 1);
        let c = parallel_block_code(&[2, 3]).unwrap();
        assert_eq!(c.word_count(), 3);
        assert!(c.contains(&BitWord::from_bitstring("11000").unwrap()));
        assert!(c.contains(&BitWord::from_bitstring("00111").unwrap()));
        assert!(c.contains(&BitWord::from_bitstring("11111").unwrap()));
        let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(cl, 2);
        assert!(parallel_block_code(&[0]).is_err());
    }

    #[test]
    fn random_code_degenerate_densities() {
        let mut rng = substream(1, "gen");
        let c = random_code(5, 10, 0.0, &mut rng).unwrap();
        assert_eq!(c.word_count(), 1);
        assert!(c.words()[0].is_zero());
        let c = random_code(5, 10, 1.0, &mut rng).unwrap();
        assert_eq!(c.word_count(), 1);
        assert_eq!(c.words()[0].weight(), 5);
    }

    #[test]
    fn random_code_is_reproducible() {
        let a = random_code(8, 10, 0.5, &mut substream(42, "fixture")).unwrap();
        let b = random_code(8, 10, 0.5, &mut substream(42, "fixture")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cut_code_chain_length_bounded_by_vertices() {
        for seed in 0..12 {
            let mut rng = substream(seed, "cut-cl");
            let g = random_graph(6, 0.6, &mut rng).unwrap();
            if !g.is_connected() {
                continue;
            }
            let c = cut_code(&g).unwrap();
            let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            assert!(cl <= g.n - 1, "CL {cl} exceeds n-1 for seed {seed}");
        }
    }

    #[test]
    fn linear_code_chain_length_equals_rank() {
        for seed in 0..10 {
            let mut rng = substream(seed, "lin-cl");
            let q = [2u32, 3, 5][rng.gen_range(0..3)];
            let k = rng.gen_range(1..=3);
            let m = rng.gen_range(k..=6);
            let rows = (0..k)
                .map(|_| (0..m).map(|_| rng.gen_range(0..q)).collect())
                .collect();
            let spec = LinearCodeSpec { q, rows };
            let c = linear_support_code(&spec).unwrap();
            let (cl, _) = chain_length_exact(&c, DEFAULT_NODE_BUDGET).unwrap();
            assert_eq!(cl, spec.rank().unwrap(), "seed {seed} spec {spec:?}");
        }
    }

    #[test]
    fn graph_text_round_trip() {
        let g = Graph::new(4, vec![(1, 2), (2, 3), (3, 4)], None).unwrap();
        let g2 = Graph::parse(&g.to_text()).unwrap();
        assert_eq!(g2.n, 4);
        assert_eq!(g2.edges, g.edges);
        assert!(g2.is_connected());
        assert!(Graph::parse("2 1\n1 1\n").is_err());
    }
}
