//! The ERGM Stein operator and graph kernel Stein statistics.
//!
//! For a vertex pair `s` the component operator is
//! `A^(s) f(x) = q1_s f(x^(s,1)) + (1 - q1_s) f(x^(s,0)) - f(x)` and the Stein
//! kernel is
//! `h_x(s,s') = c_s c_s' [k(x^(s,1),x^(s',1)) - k(x^(s,1),x^(s',0)) - k(x^(s,0),x^(s',1)) + k(x^(s,0),x^(s',0))]`
//! with `c_s = q1_s - x_s`.
//!
//! Statistics are evaluated as squared norms of
//! `Σ_s μ_s c_s (k(x^(s,1),·) - k(x^(s,0),·))`, which equals the double sum
//! of `h_x` over the same weighted index multiset.

pub(crate) mod embedding;

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Serialize, Serializer};

use crate::ergm::{logistic, ErgmModel};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{eval_prepared, prepare, KernelSpec, Prepared};
use crate::rng;
use embedding::{Embedding, Term};

/// Largest `N` accepted by [`gkss_full`].
pub const MAX_FULL_PAIRS: usize = 2000;

/// Absolute tolerance below zero that is treated as rounding.
const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// `l(a, a) + l(b, b) - 2 l(a, b)` for `l(a, b) = exp(-(a - b)²)` on `{0, 1}`.
fn binary_gap() -> f64 {
    2.0 - 2.0 * (-1.0f64).exp()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteinMode {
    /// RKHS of the graph kernel itself.
    #[default]
    Direct,
    /// Vector-valued RKHS with `K = k(x^{-s}, ·) l(x_s, ·)`, where
    /// `k(x^{-s}, ·) = k(x^(s,1), ·) + k(x^(s,0), ·)` and `l(a, b) = exp(-(a - b)²)`.
    Composite,
}

impl SteinMode {
    /// `(α, γ)` such that the section for `s` is `c_s (α k(y_s,·) + γ k(x,·))`,
    /// `y_s` being `x` with `s` toggled.
    fn coefficients(self, x_s: bool) -> (f64, f64) {
        match self {
            SteinMode::Direct => {
                let sign = if x_s { -1.0 } else { 1.0 };
                (sign, -sign)
            }
            SteinMode::Composite => {
                let r = binary_gap().sqrt();
                (r, r)
            }
        }
    }
}

/// `q(x^(s,1) | x_{-s})`.
fn q1(model: &ErgmModel, g: &Graph, s: usize) -> f64 {
    logistic(model.log_odds(g, s))
}

/// Conditional probabilities, observed indicators and prepared perturbed
/// graphs for a fixed observation.
pub struct SteinKernelCache<'a> {
    model: &'a ErgmModel,
    graph: &'a Graph,
    spec: KernelSpec,
    mode: SteinMode,
    q1: FxHashMap<usize, f64>,
    x_prepared: Prepared,
    toggled: FxHashMap<usize, Prepared>,
}

impl<'a> SteinKernelCache<'a> {
    /// Precomputes everything needed by [`Self::stein_h`] for pairs drawn from `indices`.
    pub fn new(
        model: &'a ErgmModel,
        graph: &'a Graph,
        spec: &KernelSpec,
        mode: SteinMode,
        indices: &[usize],
    ) -> Result<Self> {
        model.check_graph(graph)?;
        spec.validate()?;
        let mut cache = Self {
            model,
            graph,
            spec: spec.clone(),
            mode,
            q1: FxHashMap::default(),
            x_prepared: prepare(spec, graph)?,
            toggled: FxHashMap::default(),
        };
        for &s in indices {
            cache.ensure(s)?;
        }
        Ok(cache)
    }

    fn ensure(&mut self, s: usize) -> Result<()> {
        self.graph.check_index(s)?;
        if !self.toggled.contains_key(&s) {
            let mut y = self.graph.clone();
            y.toggle(s);
            self.toggled.insert(s, prepare(&self.spec, &y)?);
            self.q1.insert(s, q1(self.model, self.graph, s));
        }
        Ok(())
    }

    pub fn q1(&self, s: usize) -> Result<f64> {
        self.graph.check_index(s)?;
        Ok(self.q1.get(&s).copied().unwrap_or_else(|| q1(self.model, self.graph, s)))
    }

    /// `x^(s,bit)` as a prepared graph.
    fn section(&self, s: usize, bit: bool) -> Result<&Prepared> {
        if self.graph.edge(s) == bit {
            Ok(&self.x_prepared)
        } else {
            self.toggled
                .get(&s)
                .ok_or_else(|| Error::Config(format!("pair {s} is not in the Stein cache")))
        }
    }

    fn k(&self, a: &Prepared, b: &Prepared) -> Result<f64> {
        eval_prepared(&self.spec, a, b)
    }

    /// `h_x(s, s')` from the four perturbed-graph kernel values.
    pub fn stein_h(&self, s: usize, t: usize) -> Result<f64> {
        // a fixed evaluation order keeps the kernel exactly symmetric
        if s > t {
            return self.stein_h(t, s);
        }
        let cs = self.q1(s)? - self.graph.edge(s) as u8 as f64;
        let ct = self.q1(t)? - self.graph.edge(t) as u8 as f64;
        let (s1, s0) = (self.section(s, true)?, self.section(s, false)?);
        let (t1, t0) = (self.section(t, true)?, self.section(t, false)?);
        let bracket = match self.mode {
            SteinMode::Direct => {
                self.k(s1, t1)? - self.k(s1, t0)? - self.k(s0, t1)? + self.k(s0, t0)?
            }
            SteinMode::Composite => {
                binary_gap() * (self.k(s1, t1)? + self.k(s1, t0)? + self.k(s0, t1)? + self.k(s0, t0)?)
            }
        };
        Ok(cs * ct * bracket)
    }
}

fn serialize_b<S: Serializer>(b: &Option<usize>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match b {
        Some(b) => ser.serialize_u64(*b as u64),
        None => ser.serialize_str("full"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GkssResult {
    /// The squared statistic.
    pub value: f64,
    /// Resample size; `None` for the full double sum.
    #[serde(rename = "B", serialize_with = "serialize_b")]
    pub b: Option<usize>,
    pub sampled_indices: Vec<usize>,
    pub seed: Option<u64>,
}

/// Collapses an index sequence into `(index, multiplicity)` in index order.
fn multiplicities(indices: &[usize]) -> BTreeMap<usize, usize> {
    let mut counts = BTreeMap::new();
    for &s in indices {
        *counts.entry(s).or_insert(0) += 1;
    }
    counts
}

/// Terms of `(1/|indices|) Σ_b A^(s_b) k(x, ·)` in the given mode.
pub(crate) fn stein_terms(
    model: &ErgmModel,
    g: &Graph,
    indices: &[usize],
    mode: SteinMode,
) -> Vec<Term> {
    let total = indices.len() as f64;
    multiplicities(indices)
        .into_iter()
        .map(|(s, count)| {
            let x_s = g.edge(s);
            let c = q1(model, g, s) - x_s as u8 as f64;
            let (alpha, gamma) = mode.coefficients(x_s);
            Term { index: s, weight: count as f64 / total, alpha: c * alpha, gamma: c * gamma }
        })
        .collect()
}

/// Clamps rounding noise below zero; larger negative values are errors.
pub(crate) fn clamp_square(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_TOLERANCE * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeStatistic(value))
    }
}

fn squared_norm(spec: &KernelSpec, emb: &Embedding) -> Result<f64> {
    clamp_square(emb.norm_sq(spec)?, emb.scale(spec))
}

/// `(1/B²) Σ_{b,b'} h_x(s_b, s_b')` over an explicit index sequence, e.g. a
/// stratified design covering every pair equally often.
pub fn gkss_with_indices(
    model: &ErgmModel,
    g: &Graph,
    spec: &KernelSpec,
    indices: &[usize],
    mode: SteinMode,
) -> Result<f64> {
    model.check_graph(g)?;
    spec.validate()?;
    if indices.is_empty() {
        return Err(Error::Config("at least one pair index is required".into()));
    }
    for &s in indices {
        g.check_index(s)?;
    }
    let terms = stein_terms(model, g, indices, mode);
    squared_norm(spec, &embedding::build(spec, g, &terms)?)
}

/// `(1/N²) Σ_{s,s'} h_x(s, s')`.
pub fn gkss_full(model: &ErgmModel, g: &Graph, spec: &KernelSpec) -> Result<GkssResult> {
    gkss_full_with(model, g, spec, SteinMode::Direct)
}

pub fn gkss_full_with(
    model: &ErgmModel,
    g: &Graph,
    spec: &KernelSpec,
    mode: SteinMode,
) -> Result<GkssResult> {
    let pairs = g.num_pairs();
    if pairs > MAX_FULL_PAIRS {
        return Err(Error::Capacity(format!(
            "full statistic needs N <= {MAX_FULL_PAIRS} pairs, graph has {pairs}; use the resampled statistic"
        )));
    }
    let all: Vec<usize> = (0..pairs).collect();
    Ok(GkssResult {
        value: gkss_with_indices(model, g, spec, &all, mode)?,
        b: None,
        sampled_indices: Vec::new(),
        seed: None,
    })
}

/// `B` pair indices drawn uniformly with replacement.
pub fn draw_indices<R: rand::Rng>(rng: &mut R, num_pairs: usize, b: usize) -> Vec<usize> {
    (0..b).map(|_| rng.gen_range(0..num_pairs)).collect()
}

/// `(1/B²) Σ_{b,b'} h_x(s_b, s_b')` with `s_1..s_B` drawn from stream 0 of `seed`.
pub fn gkss_resampled(
    model: &ErgmModel,
    g: &Graph,
    spec: &KernelSpec,
    b: usize,
    seed: u64,
) -> Result<GkssResult> {
    gkss_resampled_with(model, g, spec, b, seed, SteinMode::Direct)
}

pub fn gkss_resampled_with(
    model: &ErgmModel,
    g: &Graph,
    spec: &KernelSpec,
    b: usize,
    seed: u64,
    mode: SteinMode,
) -> Result<GkssResult> {
    if b == 0 {
        return Err(Error::Config("resample size B must be at least 1".into()));
    }
    let mut r = rng::stream(seed, 0);
    let indices = draw_indices(&mut r, g.num_pairs(), b);
    Ok(GkssResult {
        value: gkss_with_indices(model, g, spec, &indices, mode)?,
        b: Some(b),
        sampled_indices: indices,
        seed: Some(seed),
    })
}

/// `A^(s) f(x) = q1_s f(x^(s,1)) + (1 - q1_s) f(x^(s,0)) - f(x)`.
pub fn stein_component<F>(model: &ErgmModel, g: &Graph, s: usize, f: F) -> Result<f64>
where
    F: Fn(&Graph) -> Option<f64>,
{
    model.check_graph(g)?;
    g.check_index(s)?;
    let p = q1(model, g, s);
    let on = f(&g.with_edge(s, true)?).ok_or(Error::IncompleteFunction)?;
    let off = f(&g.with_edge(s, false)?).ok_or(Error::IncompleteFunction)?;
    let here = f(g).ok_or(Error::IncompleteFunction)?;
    Ok(p * on + (1.0 - p) * off - here)
}

/// `(1/N) Σ_s A^(s) f(x)`; `f` returns `None` where it is undefined.
pub fn stein_apply<F>(model: &ErgmModel, g: &Graph, f: F) -> Result<f64>
where
    F: Fn(&Graph) -> Option<f64>,
{
    let pairs = g.num_pairs();
    let mut total = 0.0;
    for s in 0..pairs {
        total += stein_component(model, g, s, &f)?;
    }
    Ok(total / pairs as f64)
}
