//! Graph kernels.
//!
//! Each graph is first reduced to a [`Prepared`] representation (features,
//! walk matrices or indicator bits); kernel values are then computed between
//! representations, so Gram matrices pay the per-graph cost once.

mod spec;
mod walk;
mod wl;

pub use spec::{KernelFamily, KernelSpec};
pub use wl::{wl_features, WlFeature};

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::{shortest_path_matrix, Graph, UNREACHABLE};
use walk::WalkGraph;
pub(crate) use wl::WlLabels;

#[derive(Debug, Clone)]
enum Repr {
    Wl(WlFeature),
    /// Ordered-pair counts per finite shortest-path length.
    Sp(Vec<f64>),
    /// Indicator words; VEG and GaussAdj are Gaussians in the Hamming distance.
    Bits { n: usize, words: Vec<u64>, ones: u64 },
    Walk(WalkGraph),
    Steps(Vec<f64>),
    Edges(f64),
}

/// A graph reduced to what its kernel needs, with its self-kernel.
#[derive(Debug, Clone)]
pub struct Prepared {
    repr: Repr,
    self_value: f64,
}

impl Prepared {
    pub fn self_value(&self) -> f64 {
        self.self_value
    }
}

pub fn prepare(spec: &KernelSpec, g: &Graph) -> Result<Prepared> {
    let repr = match &spec.family {
        KernelFamily::Wl { levels } => Repr::Wl(wl_features(g, *levels)),
        KernelFamily::ShortestPath => Repr::Sp(shortest_path_counts(g)),
        KernelFamily::Veg { .. } | KernelFamily::GaussAdj { .. } => {
            let bits = g.indicators();
            let mut words = vec![0u64; bits.len().div_ceil(64)];
            for (s, &b) in bits.iter().enumerate() {
                if b {
                    words[s / 64] |= 1 << (s % 64);
                }
            }
            Repr::Bits { n: g.n(), words, ones: g.edge_count() as u64 }
        }
        KernelFamily::Grw { .. } => Repr::Walk(WalkGraph::new(g)),
        KernelFamily::KStepRw { weights } => Repr::Steps(walk::walk_counts(g, weights.len() - 1)),
        KernelFamily::EdgeCountProduct => Repr::Edges(g.edge_count() as f64),
    };
    let mut prepared = Prepared { repr, self_value: 0.0 };
    prepared.self_value = raw_eval(spec, &prepared, &prepared)?;
    Ok(prepared)
}

fn shortest_path_counts(g: &Graph) -> Vec<f64> {
    let d = shortest_path_matrix(g);
    let mut counts = Vec::new();
    for i in 0..g.n() {
        for j in 0..g.n() {
            let dist = d.get(i, j);
            if i != j && dist != UNREACHABLE {
                let dist = dist as usize;
                if counts.len() < dist {
                    counts.resize(dist, 0.0);
                }
                counts[dist - 1] += 1.0;
            }
        }
    }
    counts
}

fn raw_eval(spec: &KernelSpec, a: &Prepared, b: &Prepared) -> Result<f64> {
    Ok(match (&spec.family, &a.repr, &b.repr) {
        (_, Repr::Wl(x), Repr::Wl(y)) => x.dot(y),
        (_, Repr::Sp(x), Repr::Sp(y)) => x.iter().zip(y).map(|(p, q)| p * q).sum(),
        (KernelFamily::Veg { sigma }, Repr::Bits { n, words, ones }, Repr::Bits { n: m, words: w2, ones: o2 }) => {
            // each differing pair contributes two ordered edge cells to ‖h - h'‖²
            let sq = 2.0 * hamming_labelled(*n, words, *ones, *m, w2, *o2);
            (-sq / (2.0 * sigma * sigma)).exp()
        }
        (KernelFamily::GaussAdj { sigma }, Repr::Bits { n, words, .. }, Repr::Bits { n: m, words: w2, .. }) => {
            if n != m {
                return Err(Error::Shape(format!(
                    "adjacency kernel needs equal sizes, got {n} and {m}"
                )));
            }
            (-(hamming(words, w2) as f64) / (sigma * sigma)).exp()
        }
        (KernelFamily::Grw { lambda }, Repr::Walk(x), Repr::Walk(y)) => walk::geometric(x, y, *lambda)?,
        (KernelFamily::KStepRw { weights }, Repr::Steps(x), Repr::Steps(y)) => {
            weights.iter().zip(x.iter().zip(y)).map(|(w, (p, q))| w * p * q).sum()
        }
        (_, Repr::Edges(x), Repr::Edges(y)) => x * y,
        _ => return Err(Error::Config(format!("representation does not belong to kernel {spec}"))),
    })
}

fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

/// Number of index-labelled vertex pairs that are an edge in exactly one graph.
fn hamming_labelled(n: usize, a: &[u64], a_ones: u64, m: usize, b: &[u64], b_ones: u64) -> f64 {
    if n == m {
        return hamming(a, b) as f64;
    }
    // pairs (i, j) with both endpoints below min(n, m) share labels; the rest
    // exist in only one graph
    let k = n.min(m);
    let shared = crate::graph::num_pairs(k);
    let (small, large) = if n < m { (a, b) } else { (b, a) };
    let (small_ones, large_ones) = if n < m { (a_ones, b_ones) } else { (b_ones, a_ones) };
    let large_n = n.max(m);
    let mut both = 0u64;
    for s in 0..shared {
        let (i, j) = crate::graph::pair_of_unchecked(s, k);
        let t = crate::graph::pair_index(i, j, large_n).expect("shared pair in range");
        let bit = |w: &[u64], idx: usize| (w[idx / 64] >> (idx % 64)) & 1;
        both += bit(small, s) & bit(large, t);
    }
    (small_ones + large_ones - 2 * both) as f64
}

fn normalise(spec: &KernelSpec, value: f64, a: &Prepared, b: &Prepared) -> f64 {
    if !spec.normalize {
        return value;
    }
    let denom = (a.self_value * b.self_value).sqrt();
    if denom > 0.0 {
        value / denom
    } else {
        0.0
    }
}

pub fn eval_prepared(spec: &KernelSpec, a: &Prepared, b: &Prepared) -> Result<f64> {
    Ok(normalise(spec, raw_eval(spec, a, b)?, a, b))
}

pub fn kernel_eval(spec: &KernelSpec, g: &Graph, h: &Graph) -> Result<f64> {
    spec.validate()?;
    eval_prepared(spec, &prepare(spec, g)?, &prepare(spec, h)?)
}

/// Symmetric Gram matrix; rows of the upper triangle are filled in parallel.
pub fn gram(spec: &KernelSpec, graphs: &[Graph]) -> Result<DMatrix<f64>> {
    if graphs.is_empty() {
        return Err(Error::Shape("gram matrix of an empty graph list".into()));
    }
    spec.validate()?;
    let prepared: Vec<Prepared> = graphs
        .par_iter()
        .map(|g| prepare(spec, g))
        .collect::<Result<_>>()?;
    gram_prepared(spec, &prepared)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(k: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(k.clone()).eigenvalues.min()
}

pub fn gram_prepared(spec: &KernelSpec, prepared: &[Prepared]) -> Result<DMatrix<f64>> {
    let m = prepared.len();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (i..m).map(|j| eval_prepared(spec, &prepared[i], &prepared[j])).collect())
        .collect::<Result<_>>()?;
    let mut k = DMatrix::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    Ok(k)
}

/// Explicit finite feature map `φ` with `k(g, h) = <φ(g), φ(h)>` before
/// normalisation, and cheap `φ(y) - φ(x)` for single toggles `y` of `x`.
pub(crate) struct ToggleFeatures<'g> {
    graph: &'g Graph,
    kind: FeatureKind,
    base: FxHashMap<u64, f64>,
}

enum FeatureKind {
    Wl(WlLabels),
    Sp,
    Steps(Vec<f64>),
    Edges,
}

impl<'g> ToggleFeatures<'g> {
    /// `None` when the kernel has no finite explicit feature map.
    pub(crate) fn new(spec: &KernelSpec, graph: &'g Graph) -> Option<Self> {
        let kind = match &spec.family {
            KernelFamily::Wl { levels } => FeatureKind::Wl(WlLabels::new(graph, *levels)),
            KernelFamily::ShortestPath => FeatureKind::Sp,
            KernelFamily::KStepRw { weights } if weights.iter().all(|w| *w >= 0.0) => {
                FeatureKind::Steps(weights.iter().map(|w| w.sqrt()).collect())
            }
            KernelFamily::EdgeCountProduct => FeatureKind::Edges,
            _ => return None,
        };
        let mut this = Self { graph, kind, base: FxHashMap::default() };
        this.base = match &this.kind {
            FeatureKind::Wl(labels) => {
                labels.features().entries().map(|(l, c)| (l, c as f64)).collect()
            }
            _ => this.features_of(graph),
        };
        Some(this)
    }

    fn features_of(&self, g: &Graph) -> FxHashMap<u64, f64> {
        let mut map = FxHashMap::default();
        match &self.kind {
            FeatureKind::Wl(labels) => {
                for (l, c) in wl_features(g, labels.levels()).entries() {
                    map.insert(l, c as f64);
                }
            }
            FeatureKind::Sp => {
                for (d, c) in shortest_path_counts(g).into_iter().enumerate() {
                    if c != 0.0 {
                        map.insert(d as u64, c);
                    }
                }
            }
            FeatureKind::Steps(roots) => {
                for (t, c) in walk::walk_counts(g, roots.len() - 1).into_iter().enumerate() {
                    map.insert(t as u64, roots[t] * c);
                }
            }
            FeatureKind::Edges => {
                map.insert(0, g.edge_count() as f64);
            }
        }
        map
    }

    pub(crate) fn base(&self) -> &FxHashMap<u64, f64> {
        &self.base
    }

    pub(crate) fn base_norm_sq(&self) -> f64 {
        self.base.values().map(|v| v * v).sum()
    }

    /// Appends `φ(x with s toggled) - φ(x)` as unmerged entries.
    pub(crate) fn toggle_diff(&self, s: usize, out: &mut Vec<(u64, f64)>) {
        match &self.kind {
            FeatureKind::Wl(labels) => labels.toggle_diff(self.graph, s, out),
            FeatureKind::Edges => out.push((0, if self.graph.edge(s) { -1.0 } else { 1.0 })),
            _ => {
                let mut y = self.graph.clone();
                y.toggle(s);
                for (k, v) in self.features_of(&y) {
                    out.push((k, v));
                }
                for (&k, &v) in &self.base {
                    out.push((k, -v));
                }
            }
        }
    }
}
