//! Simple undirected graphs on labelled vertices.
//!
//! A graph on `n` vertices is stored as the ordered sequence of its
//! `N = n(n-1)/2` edge indicators. Vertex pairs are indexed lexicographically:
//! `(0,1) -> 0, (0,2) -> 1, ..., (n-2,n-1) -> N-1`. Adjacency rows are kept as
//! bitsets next to the indicator sequence so that neighbourhood intersections
//! cost one popcount per 64 vertices.

mod io;
mod stats;
mod summary;

pub use io::{parse_edge_list, read_edge_list, write_edge_list};
pub use stats::{change_statistic, count_statistic, PairWeights, Scaling, StatKind, StatisticSpec};
pub(crate) use stats::change_at;
pub use summary::{
    shortest_path_matrix, summary_distribution, DistanceMatrix, Histogram, SummaryKind,
    UNREACHABLE,
};

use rand::Rng;

use crate::error::{Error, Result};

/// Number of vertex pairs on `n` vertices.
#[inline]
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

#[inline]
fn row_offset(i: usize, n: usize) -> usize {
    // index of the pair (i, i+1)
    i * (2 * n - i - 1) / 2
}

/// Lexicographic index of the vertex pair `{i, j}` with `i < j`.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(row_offset(i, n) + (j - i - 1))
}

/// Inverse of [`pair_index`].
pub fn pair_of(s: usize, n: usize) -> Result<(usize, usize)> {
    let len = num_pairs(n);
    if s >= len {
        return Err(Error::EdgeIndex { index: s, len });
    }
    Ok(pair_of_unchecked(s, n))
}

#[inline]
pub(crate) fn pair_of_unchecked(s: usize, n: usize) -> (usize, usize) {
    let b = (2 * n - 1) as f64;
    let disc = (b * b - 8.0 * s as f64).max(0.0);
    let mut i = ((b - disc.sqrt()) / 2.0).floor().max(0.0) as usize;
    i = i.min(n - 2);
    while i > 0 && row_offset(i, n) > s {
        i -= 1;
    }
    while i + 1 < n - 1 && row_offset(i + 1, n) <= s {
        i += 1;
    }
    (i, i + 1 + (s - row_offset(i, n)))
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    edges: Vec<u64>,
    degrees: Vec<u32>,
    edge_count: usize,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edge_list())
            .finish()
    }
}

impl Graph {
    /// The empty graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "a graph needs at least one vertex");
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            adj: vec![0; n * words],
            edges: vec![0; num_pairs(n).div_ceil(64)],
            degrees: vec![0; n],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for s in 0..g.num_pairs() {
            g.set_edge(s, true);
        }
        g
    }

    /// Builds a graph from vertex pairs; pairs are canonicalised so `(j, i)` equals `(i, j)`.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in pairs {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let s = pair_index(i, j, n)?;
            g.set_edge(s, true);
        }
        Ok(g)
    }

    /// Builds a graph from a full indicator sequence of length `N`.
    pub fn from_indicators(n: usize, bits: &[bool]) -> Result<Self> {
        let len = num_pairs(n);
        if bits.len() != len {
            return Err(Error::Shape(format!(
                "expected {len} edge indicators for n = {n}, got {}",
                bits.len()
            )));
        }
        let mut g = Self::empty(n);
        for (s, &b) in bits.iter().enumerate() {
            if b {
                g.set_edge(s, true);
            }
        }
        Ok(g)
    }

    /// Graph whose indicator `s` is bit `s` of `mask`. Requires `N <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::empty(n);
        for s in 0..g.num_pairs().min(64) {
            if mask >> s & 1 == 1 {
                g.set_edge(s, true);
            }
        }
        g
    }

    /// Inverse of [`Graph::from_mask`].
    pub fn mask(&self) -> u64 {
        debug_assert!(self.num_pairs() <= 64);
        self.edges.first().copied().unwrap_or(0)
    }

    /// Independent edges with probability `p`.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Self::empty(n);
        for s in 0..g.num_pairs() {
            if rng.gen::<f64>() < p {
                g.set_edge(s, true);
            }
        }
        g
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_pairs(&self) -> usize {
        num_pairs(self.n)
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v] as usize
    }

    /// Indicator `x_s`.
    #[inline]
    pub fn edge(&self, s: usize) -> bool {
        self.edges[s / 64] >> (s % 64) & 1 == 1
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// The indicator sequence as booleans.
    pub fn indicators(&self) -> Vec<bool> {
        (0..self.num_pairs()).map(|s| self.edge(s)).collect()
    }

    /// Lexicographically ordered vertex pairs that are joined.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for i in 0..self.n {
            for j in self.neighbours(i) {
                if j > i {
                    out.push((i, j));
                }
            }
        }
        out
    }

    #[inline]
    pub(crate) fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    /// Neighbours of `v` in increasing order.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(v).iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }

    /// `|N(i) ∩ N(j)|`.
    #[inline]
    pub fn common_neighbours(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Sets indicator `s` in place, keeping adjacency rows and degrees consistent.
    pub fn set_edge(&mut self, s: usize, bit: bool) {
        if self.edge(s) == bit {
            return;
        }
        let (i, j) = pair_of_unchecked(s, self.n);
        let w = self.words;
        self.edges[s / 64] ^= 1 << (s % 64);
        self.adj[i * w + j / 64] ^= 1 << (j % 64);
        self.adj[j * w + i / 64] ^= 1 << (i % 64);
        if bit {
            self.degrees[i] += 1;
            self.degrees[j] += 1;
            self.edge_count += 1;
        } else {
            self.degrees[i] -= 1;
            self.degrees[j] -= 1;
            self.edge_count -= 1;
        }
    }

    /// Flips indicator `s` in place.
    pub fn toggle(&mut self, s: usize) {
        let b = self.edge(s);
        self.set_edge(s, !b);
    }

    /// `x^{(s,1)}` for `bit = true`, `x^{(s,0)}` for `bit = false`.
    pub fn with_edge(&self, s: usize, bit: bool) -> Result<Self> {
        self.check_index(s)?;
        let mut g = self.clone();
        g.set_edge(s, bit);
        Ok(g)
    }

    pub(crate) fn check_index(&self, s: usize) -> Result<()> {
        let len = self.num_pairs();
        if s >= len {
            return Err(Error::EdgeIndex { index: s, len });
        }
        Ok(())
    }

    /// Recomputes degrees from the adjacency rows; used to validate the cache.
    pub fn recomputed_degrees(&self) -> Vec<u32> {
        (0..self.n)
            .map(|v| self.row(v).iter().map(|w| w.count_ones()).sum())
            .collect()
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Shape(format!(
                "permutation of length {} for n = {}",
                perm.len(),
                self.n
            )));
        }
        let pairs: Vec<_> = self
            .edge_list()
            .into_iter()
            .map(|(i, j)| (perm[i], perm[j]))
            .collect();
        Self::from_edges(self.n, &pairs)
    }

    /// Dense 0/1 adjacency matrix in row-major order.
    pub fn adjacency_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (i, j) in self.edge_list() {
            a[i * n + j] = 1.0;
            a[j * n + i] = 1.0;
        }
        a
    }
}
