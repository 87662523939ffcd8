//! Tests from several i.i.d. observed networks: a V-statistic of a Stein
//! kernel calibrated by a Rademacher wild bootstrap.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::report::{check_alpha, ReportMeta, TestReport};
use crate::ergm::ErgmModel;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::KernelSpec;
use crate::rng;
use crate::stein::embedding::{self, Embedding, Term};
use crate::stein::{draw_indices, stein_terms, SteinMode};

const STREAM_BOOTSTRAP: u64 = 0;
const STREAM_OBSERVATION: u64 = 16;

pub const DEFAULT_BOOTSTRAP: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiParams {
    pub spec: KernelSpec,
    pub alpha: f64,
    pub n_boot: usize,
    pub seed: u64,
    /// Pairs drawn per graph; `None` sums over every pair.
    pub b: Option<usize>,
    pub mode: SteinMode,
}

impl MultiParams {
    pub fn new(spec: KernelSpec, alpha: f64, seed: u64) -> Self {
        Self { spec, alpha, n_boot: DEFAULT_BOOTSTRAP, seed, b: None, mode: SteinMode::Direct }
    }
}

/// `q(x^(s,b)) / q(x)` for the toggled value `b = 1 - x_s`.
pub fn toggle_density_ratio(model: &ErgmModel, g: &Graph, s: usize) -> Result<f64> {
    model.check_graph(g)?;
    g.check_index(s)?;
    let log_odds = model.log_odds(g, s);
    Ok(if g.edge(s) { (-log_odds).exp() } else { log_odds.exp() })
}

/// Terms of `(1/|indices|) Σ_s A^{D,s} k(x, ·)`, where
/// `A^{D,s} f(x) = f(x) q(y_s)/q(x) - f(y_s)` and `y_s` toggles `s`.
fn kdsd_terms(model: &ErgmModel, g: &Graph, indices: &[usize]) -> Vec<Term> {
    let mut counts = std::collections::BTreeMap::new();
    for &s in indices {
        *counts.entry(s).or_insert(0usize) += 1;
    }
    let total = indices.len() as f64;
    counts
        .into_iter()
        .map(|(s, count)| {
            let log_odds = model.log_odds(g, s);
            let ratio = if g.edge(s) { (-log_odds).exp() } else { log_odds.exp() };
            Term { index: s, weight: count as f64 / total, alpha: -1.0, gamma: ratio }
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Operator {
    Glauber(SteinMode),
    Discrete,
}

fn stein_gram(
    model: &ErgmModel,
    observations: &[Graph],
    params: &MultiParams,
    op: Operator,
) -> Result<DMatrix<f64>> {
    let embeddings: Vec<Embedding> = observations
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            model.check_graph(g)?;
            let indices = match params.b {
                Some(b) => draw_indices(
                    &mut rng::stream(params.seed, STREAM_OBSERVATION + i as u64),
                    g.num_pairs(),
                    b,
                ),
                None => (0..g.num_pairs()).collect(),
            };
            let terms = match op {
                Operator::Glauber(mode) => stein_terms(model, g, &indices, mode),
                Operator::Discrete => kdsd_terms(model, g, &indices),
            };
            embedding::build(&params.spec, g, &terms)
        })
        .collect::<Result<_>>()?;
    let m = embeddings.len();
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = embeddings[i].dot(&embeddings[j], &params.spec)?;
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// `(1/m²) Σ_{i,j} w_i w_j H_ij`.
pub fn weighted_v_statistic(h: &DMatrix<f64>, w: &[f64]) -> f64 {
    let m = w.len();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            total += w[i] * w[j] * h[(i, j)];
        }
    }
    total / (m * m) as f64
}

fn run(
    name: &'static str,
    model: &ErgmModel,
    observations: &[Graph],
    params: &MultiParams,
    op: Operator,
) -> Result<TestReport> {
    let started = Instant::now();
    check_alpha(params.alpha)?;
    params.spec.validate()?;
    if observations.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 observations, got {}",
            observations.len()
        )));
    }
    if params.n_boot == 0 {
        return Err(Error::Config("need at least one bootstrap replicate".into()));
    }
    if params.b == Some(0) {
        return Err(Error::Config("resample size B must be at least 1".into()));
    }
    let h = stein_gram(model, observations, params, op)?;
    let m = observations.len();
    let statistic = weighted_v_statistic(&h, &vec![1.0; m]);
    let mut boot_rng = rng::stream(params.seed, STREAM_BOOTSTRAP);
    let null_stats: Vec<f64> = (0..params.n_boot)
        .map(|_| {
            let w: Vec<f64> = (0..m).map(|_| if boot_rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            weighted_v_statistic(&h, &w)
        })
        .collect();
    let meta = ReportMeta {
        test: name,
        alpha: params.alpha,
        b: params.b,
        m,
        seed: params.seed,
        kernel: Some(params.spec.to_string()),
    };
    Ok(TestReport::assemble(meta, statistic, null_stats, started))
}

/// Graph kernel Stein discrepancy test from `m` observations.
pub fn gksd_multi_test(model: &ErgmModel, observations: &[Graph], params: &MultiParams) -> Result<TestReport> {
    run("gksd", model, observations, params, Operator::Glauber(params.mode))
}

/// Kernel discrete Stein discrepancy test with the cyclic difference operator.
pub fn kdsd_multi_test(model: &ErgmModel, observations: &[Graph], params: &MultiParams) -> Result<TestReport> {
    run("kdsd", model, observations, params, Operator::Discrete)
}

/// The V-statistic alone, `(1/m²) Σ_{i,j} H(x_i, x_j)`; defined for `m >= 1`.
pub fn gksd_statistic(model: &ErgmModel, observations: &[Graph], params: &MultiParams) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::Config("need at least 1 observation".into()));
    }
    let h = stein_gram(model, observations, params, Operator::Glauber(params.mode))?;
    Ok(weighted_v_statistic(&h, &vec![1.0; observations.len()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergm::{glauber_sample, logistic};
    use crate::kernels::kernel_eval;
    use crate::stein::gkss_full;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> ErgmModel {
        ErgmModel::e2st(8, [-1.5, 0.0, 0.05]).unwrap()
    }

    #[test]
    fn single_observation_reduces_to_gkss() {
        let m = model();
        let g = glauber_sample(&m, 1, 20, 1, 3).unwrap().remove(0);
        for spec in ["wl:3", "veg:1"] {
            let params = MultiParams::new(spec.parse().unwrap(), 0.05, 1);
            let v = gksd_statistic(&m, std::slice::from_ref(&g), &params).unwrap();
            let full = gkss_full(&m, &g, &params.spec).unwrap().value;
            assert!((v - full).abs() < 1e-12 * full.max(1.0), "{v} vs {full}");
        }
    }

    #[test]
    fn cross_graph_entries_match_literal_double_sum() {
        let m = ErgmModel::e2st(5, [-1.0, 0.1, 0.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let graphs: Vec<Graph> = (0..2).map(|_| Graph::erdos_renyi(5, 0.4, &mut rng)).collect();
        let spec: KernelSpec = "sp".parse().unwrap();
        let params = MultiParams::new(spec.clone(), 0.05, 1);
        let h = stein_gram(&m, &graphs, &params, Operator::Glauber(SteinMode::Direct)).unwrap();

        let (x, z) = (&graphs[0], &graphs[1]);
        let mut literal = 0.0;
        for s in 0..10 {
            for t in 0..10 {
                let cs = m.conditional_edge_prob(x, s).unwrap() - x.edge(s) as u8 as f64;
                let ct = m.conditional_edge_prob(z, t).unwrap() - z.edge(t) as u8 as f64;
                let k = |a: bool, b: bool| {
                    kernel_eval(&spec, &x.with_edge(s, a).unwrap(), &z.with_edge(t, b).unwrap()).unwrap()
                };
                literal += cs * ct * (k(true, true) - k(true, false) - k(false, true) + k(false, false));
            }
        }
        literal /= 100.0;
        assert!((h[(0, 1)] - literal).abs() < 1e-10 * literal.abs().max(1.0));
    }

    #[test]
    fn bootstrap_with_unit_weights_is_the_statistic() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -0.1, 0.5, 1.0, 0.2, -0.1, 0.2, 3.0]);
        let stat = weighted_v_statistic(&h, &[1.0; 3]);
        assert_eq!(stat, h.sum() / 9.0);
        assert_eq!(weighted_v_statistic(&h, &[-1.0; 3]), stat);
    }

    #[test]
    fn identical_pair_is_nonnegative() {
        let m = model();
        let g = glauber_sample(&m, 1, 20, 1, 8).unwrap().remove(0);
        let params = MultiParams::new(KernelSpec::wl(2), 0.05, 4);
        let r = gksd_multi_test(&m, &[g.clone(), g.clone()], &params).unwrap();
        assert!(r.statistic >= 0.0);
        assert_eq!(r.null_stats.len(), DEFAULT_BOOTSTRAP);
        assert!(r.invariants_hold());
        assert!(gksd_multi_test(&m, &[g], &params).is_err());
    }

    #[test]
    fn density_ratios_follow_log_density() {
        let m = ErgmModel::e2st(7, [-0.7, 0.15, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for _ in 0..30 {
            let g = Graph::erdos_renyi(7, 0.4, &mut rng);
            let s = rng.gen_range(0..21);
            let y = g.with_edge(s, !g.edge(s)).unwrap();
            let direct = (m.log_unnormalized_density(&y).unwrap() - m.log_unnormalized_density(&g).unwrap()).exp();
            let ratio = toggle_density_ratio(&m, &g, s).unwrap();
            assert!((ratio - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn uniform_kdsd_operator_is_a_signed_difference() {
        // β = 0: every ratio is 1, so A^{D,s} f(x) = f(x) - f(y_s)
        let m = ErgmModel::edges_only(5, 0.0).unwrap();
        let g = Graph::erdos_renyi(5, 0.5, &mut ChaCha8Rng::seed_from_u64(73));
        let terms = kdsd_terms(&m, &g, &[0, 3, 3]);
        assert!(terms.iter().all(|t| t.alpha == -1.0 && t.gamma == 1.0));
        assert_eq!(terms[1].weight, 2.0 / 3.0);
        assert_eq!(logistic(0.0), 0.5);
    }

    #[test]
    fn subsampled_multi_test_is_reproducible() {
        let m = model();
        let obs = glauber_sample(&m, 4, 20, 2, 9).unwrap();
        let mut params = MultiParams::new(KernelSpec::wl(3), 0.05, 12);
        params.b = Some(10);
        params.n_boot = 50;
        let a = kdsd_multi_test(&m, &obs, &params).unwrap();
        let b = kdsd_multi_test(&m, &obs, &params).unwrap();
        assert_eq!(a, TestReport { wall_time_ms: a.wall_time_ms, ..b });
    }
}
