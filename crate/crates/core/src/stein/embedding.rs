//! RKHS elements of the form `Σ_u μ_u (α_u k(y_u, ·) + γ_u k(x, ·))`, where
//! `y_u` is `x` with pair `u` toggled.
//!
//! Explicit-feature kernels accumulate a sparse vector; every other kernel
//! keeps the weighted list of prepared graphs and expands inner products.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::graph::Graph;
use crate::kernels::{eval_prepared, prepare, KernelSpec, Prepared, ToggleFeatures};

/// One toggled section: index, multiplicity weight, coefficient on `k(y_u, ·)`
/// and coefficient on `k(x, ·)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub index: usize,
    pub weight: f64,
    pub alpha: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum Embedding {
    Explicit(FxHashMap<u64, f64>),
    Implicit(Vec<(f64, Arc<Prepared>)>),
}

pub(crate) fn build(spec: &KernelSpec, g: &Graph, terms: &[Term]) -> Result<Embedding> {
    if let Some(features) = ToggleFeatures::new(spec, g) {
        return Ok(Embedding::Explicit(explicit(spec, &features, terms)));
    }
    let base = Arc::new(prepare(spec, g)?);
    let toggled: Vec<Prepared> = terms
        .par_iter()
        .map(|t| {
            let mut y = g.clone();
            y.toggle(t.index);
            prepare(spec, &y)
        })
        .collect::<Result<_>>()?;
    let mut list = Vec::with_capacity(terms.len() + 1);
    let mut base_weight = 0.0;
    for (t, p) in terms.iter().zip(toggled) {
        list.push((t.weight * t.alpha, Arc::new(p)));
        base_weight += t.weight * t.gamma;
    }
    list.push((base_weight, base));
    Ok(Embedding::Implicit(list))
}

fn explicit(spec: &KernelSpec, features: &ToggleFeatures<'_>, terms: &[Term]) -> FxHashMap<u64, f64> {
    let base = features.base();
    let inv = |norm_sq: f64| if norm_sq > 0.0 { norm_sq.sqrt().recip() } else { 0.0 };
    let base_scale = if spec.normalize { inv(features.base_norm_sq()) } else { 1.0 };
    let mut acc: FxHashMap<u64, f64> = FxHashMap::default();
    let mut base_coef = 0.0;
    let mut diff = Vec::new();
    let mut merged: FxHashMap<u64, f64> = FxHashMap::default();
    for t in terms {
        diff.clear();
        features.toggle_diff(t.index, &mut diff);
        // φ̃(y) = (φ(x) + d) s_y, φ̃(x) = φ(x) s_x
        let y_scale = if spec.normalize {
            merged.clear();
            for &(k, v) in &diff {
                *merged.entry(k).or_default() += v;
            }
            let cross: f64 = merged.iter().map(|(k, v)| v * base.get(k).unwrap_or(&0.0)).sum();
            let diff_sq: f64 = merged.values().map(|v| v * v).sum();
            inv(features.base_norm_sq() + 2.0 * cross + diff_sq)
        } else {
            1.0
        };
        let on_y = t.weight * t.alpha * y_scale;
        for &(k, v) in &diff {
            *acc.entry(k).or_default() += on_y * v;
        }
        base_coef += on_y + t.weight * t.gamma * base_scale;
    }
    if base_coef != 0.0 {
        for (&k, &v) in base {
            *acc.entry(k).or_default() += base_coef * v;
        }
    }
    acc
}

impl Embedding {
    pub(crate) fn dot(&self, other: &Embedding, spec: &KernelSpec) -> Result<f64> {
        match (self, other) {
            (Embedding::Explicit(a), Embedding::Explicit(b)) => {
                let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                Ok(small.iter().map(|(k, v)| v * large.get(k).unwrap_or(&0.0)).sum())
            }
            (Embedding::Implicit(a), Embedding::Implicit(b)) => {
                let rows: Vec<f64> = a
                    .par_iter()
                    .map(|(wa, pa)| -> Result<f64> {
                        let mut row = 0.0;
                        for (wb, pb) in b {
                            if *wa != 0.0 && *wb != 0.0 {
                                row += wb * eval_prepared(spec, pa, pb)?;
                            }
                        }
                        Ok(wa * row)
                    })
                    .collect::<Result<_>>()?;
                Ok(rows.iter().sum())
            }
            _ => unreachable!("embeddings of one kernel share a representation"),
        }
    }

    /// `‖·‖²`, using symmetry for implicit embeddings.
    pub(crate) fn norm_sq(&self, spec: &KernelSpec) -> Result<f64> {
        match self {
            Embedding::Explicit(a) => Ok(a.values().map(|v| v * v).sum()),
            Embedding::Implicit(list) => {
                let rows: Vec<f64> = (0..list.len())
                    .into_par_iter()
                    .map(|i| -> Result<f64> {
                        let (wi, pi) = &list[i];
                        if *wi == 0.0 {
                            return Ok(0.0);
                        }
                        let mut row = 0.5 * wi * eval_prepared(spec, pi, pi)?;
                        for (wj, pj) in &list[i + 1..] {
                            if *wj != 0.0 {
                                row += wj * eval_prepared(spec, pi, pj)?;
                            }
                        }
                        Ok(2.0 * wi * row)
                    })
                    .collect::<Result<_>>()?;
                Ok(rows.iter().sum())
            }
        }
    }

    /// Upper bound on `|‖·‖²|` from self-kernels, used to judge rounding.
    pub(crate) fn scale(&self, spec: &KernelSpec) -> f64 {
        match self {
            Embedding::Explicit(a) => a.values().map(|v| v * v).sum(),
            Embedding::Implicit(list) => list
                .iter()
                .map(|(w, p)| {
                    let diag = if spec.normalize { 1.0 } else { p.self_value().abs() };
                    w.abs() * diag.sqrt()
                })
                .sum::<f64>()
                .powi(2),
        }
    }
}
