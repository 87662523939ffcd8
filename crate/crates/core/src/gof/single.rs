//! Monte Carlo tests of a single observed network against simulations from
//! the null model.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{check_alpha, ReportMeta, TestReport};
use crate::ergm::{glauber_sample_with, ErgmModel, GlauberConfig};
use crate::error::{Error, Result};
use crate::graph::{count_statistic, summary_distribution, Graph, Histogram, StatisticSpec, SummaryKind};
use crate::kernels::KernelSpec;
use crate::rng;
use crate::stein::{draw_indices, gkss_with_indices, SteinMode};

/// Stream carrying the observed statistic's own randomness.
const STREAM_OBSERVED: u64 = 0;
/// Stream of the null simulation `z_1..z_m`.
const STREAM_NULL: u64 = 1;
/// Stream of a second, disjoint simulation batch.
const STREAM_SECOND: u64 = 2;
/// Replicate `i` draws from stream `STREAM_REPLICATE + i`.
const STREAM_REPLICATE: u64 = 16;

/// Smallest number of null simulations accepted.
pub const MIN_NULL_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    /// Number of null simulations.
    pub m: usize,
    pub alpha: f64,
    pub seed: u64,
    pub glauber: GlauberConfig,
}

impl MonteCarlo {
    pub fn new(m: usize, alpha: f64, seed: u64) -> Self {
        Self { m, alpha, seed, glauber: GlauberConfig::default() }
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.m < MIN_NULL_SAMPLES {
            return Err(Error::Config(format!(
                "need at least {MIN_NULL_SAMPLES} null simulations, got {}",
                self.m
            )));
        }
        Ok(())
    }

    fn simulate(&self, model: &ErgmModel, stream: u64, count: usize) -> Vec<Graph> {
        glauber_sample_with(model, count, self.glauber, rng::stream(self.seed, stream))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GkssParams {
    pub spec: KernelSpec,
    /// Resample size `B`.
    pub b: usize,
    pub mode: SteinMode,
}

impl GkssParams {
    pub fn new(spec: KernelSpec, b: usize) -> Self {
        Self { spec, b, mode: SteinMode::Direct }
    }
}

fn resampled_statistic(
    model: &ErgmModel,
    g: &Graph,
    params: &GkssParams,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let indices = draw_indices(&mut rng::stream(seed, stream), g.num_pairs(), params.b);
    gkss_with_indices(model, g, &params.spec, &indices, params.mode)
}

/// The kernel Stein Monte Carlo test: the resampled statistic of the
/// observation against the same statistic on `m` null simulations, each with
/// fresh pair draws.
pub fn gkss_test(
    model: &ErgmModel,
    observed: &Graph,
    params: &GkssParams,
    mc: &MonteCarlo,
) -> Result<TestReport> {
    let started = Instant::now();
    mc.validate()?;
    model.check_graph(observed)?;
    if params.b == 0 {
        return Err(Error::Config("resample size B must be at least 1".into()));
    }
    let statistic = resampled_statistic(model, observed, params, mc.seed, STREAM_OBSERVED)?;
    let null = mc.simulate(model, STREAM_NULL, mc.m);
    let null_stats = null
        .par_iter()
        .enumerate()
        .map(|(i, z)| resampled_statistic(model, z, params, mc.seed, STREAM_REPLICATE + i as u64))
        .collect::<Result<Vec<f64>>>()?;
    let meta = ReportMeta {
        test: "gkss",
        alpha: mc.alpha,
        b: Some(params.b),
        m: mc.m,
        seed: mc.seed,
        kernel: Some(params.spec.to_string()),
    };
    Ok(TestReport::assemble(meta, statistic, null_stats, started))
}

/// Sample variance of the degree sequence, with divisor `n - 1`.
pub fn degree_variance(g: &Graph) -> f64 {
    let n = g.n() as f64;
    let mean = g.degrees().iter().map(|&d| d as f64).sum::<f64>() / n;
    g.degrees().iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// Reject for large values.
    #[default]
    Upper,
    /// Reject for large `|value - mean of null values|`.
    TwoSided,
}

pub fn degree_variance_test(
    model: &ErgmModel,
    observed: &Graph,
    sided: Sidedness,
    mc: &MonteCarlo,
) -> Result<TestReport> {
    let started = Instant::now();
    mc.validate()?;
    model.check_graph(observed)?;
    let null: Vec<f64> = mc.simulate(model, STREAM_NULL, mc.m).iter().map(degree_variance).collect();
    let mut statistic = degree_variance(observed);
    let null_stats = match sided {
        Sidedness::Upper => null,
        Sidedness::TwoSided => {
            let centre = null.iter().sum::<f64>() / null.len() as f64;
            statistic = (statistic - centre).abs();
            null.iter().map(|v| (v - centre).abs()).collect()
        }
    };
    let meta = ReportMeta {
        test: "degree",
        alpha: mc.alpha,
        b: None,
        m: mc.m,
        seed: mc.seed,
        kernel: None,
    };
    Ok(TestReport::assemble(meta, statistic, null_stats, started))
}

/// `(1/m') Σ_j d_TV(S(g), S(w_j))` over a batch of null simulations.
fn mean_tv(g: &Graph, kind: SummaryKind, batch: &[Graph]) -> f64 {
    let target = summary_distribution(g, kind);
    batch
        .iter()
        .map(|w| target.tv_distance(&summary_distribution(w, kind)))
        .sum::<f64>()
        / batch.len() as f64
}

/// Graphical test: mean total variation distance between the summary
/// distribution of a graph and those of `m_prime` null simulations. Every
/// null replicate is compared with its own independent batch.
pub fn mgra_tv_test(
    model: &ErgmModel,
    observed: &Graph,
    kind: SummaryKind,
    m_prime: usize,
    mc: &MonteCarlo,
) -> Result<TestReport> {
    let started = Instant::now();
    mc.validate()?;
    model.check_graph(observed)?;
    if m_prime < 10 {
        return Err(Error::Config(format!("need at least 10 comparison simulations, got {m_prime}")));
    }
    let statistic = mean_tv(observed, kind, &mc.simulate(model, STREAM_SECOND, m_prime));
    let null = mc.simulate(model, STREAM_NULL, mc.m);
    let null_stats: Vec<f64> = null
        .par_iter()
        .enumerate()
        .map(|(i, z)| mean_tv(z, kind, &mc.simulate(model, STREAM_REPLICATE + i as u64, m_prime)))
        .collect();
    let test = match kind {
        SummaryKind::Degree => "mgra-degree",
        SummaryKind::EdgewiseSharedPartners => "mgra-espart",
        SummaryKind::DyadwiseSharedPartners => "mgra-dspart",
        SummaryKind::TriadCensus => "mgra-triad",
        SummaryKind::GeodesicDistance => "mgra-geodesic",
    };
    let meta = ReportMeta { test, alpha: mc.alpha, b: None, m: mc.m, seed: mc.seed, kernel: None };
    Ok(TestReport::assemble(meta, statistic, null_stats, started))
}

/// The statistic vector of the Mahalanobis test.
#[derive(Debug, Clone, PartialEq)]
pub enum StatVector {
    Statistics(Vec<StatisticSpec>),
    /// Counts of a summary histogram, zero-padded to a common length.
    Summary(SummaryKind),
}

impl StatVector {
    fn evaluate(&self, g: &Graph) -> Result<Vec<f64>> {
        match self {
            StatVector::Statistics(specs) => specs.iter().map(|s| count_statistic(g, s)).collect(),
            StatVector::Summary(kind) => {
                let Histogram { counts } = summary_distribution(g, *kind);
                Ok(counts.into_iter().map(|c| c as f64).collect())
            }
        }
    }
}

fn pad(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let dim = rows.iter().map(Vec::len).max().unwrap_or(0);
    for r in &mut rows {
        r.resize(dim, 0.0);
    }
    rows
}

/// Mean and `εI`-regularised inverse-covariance factor from simulated vectors.
struct Moments {
    mean: DVector<f64>,
    cholesky: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Moments {
    fn estimate(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let dim = rows[0].len();
        let data = DMatrix::from_fn(m, dim, |i, j| rows[i][j]);
        let mean = DVector::from_fn(dim, |j, _| data.column(j).mean());
        let centred = DMatrix::from_fn(m, dim, |i, j| data[(i, j)] - mean[j]);
        let mut cov = centred.transpose() * &centred / (m as f64 - 1.0);
        let zero_variance: Vec<usize> = (0..dim).filter(|&j| cov[(j, j)] <= 0.0).collect();
        let trace = cov.trace();
        if trace <= 0.0 {
            return Err(Error::RankDeficient(zero_variance));
        }
        let eps = 1e-8 * trace / dim as f64;
        for j in 0..dim {
            cov[(j, j)] += eps;
        }
        let cholesky = cov.cholesky().ok_or(Error::RankDeficient(zero_variance))?;
        Ok(Self { mean, cholesky })
    }

    fn distance(&self, v: &[f64]) -> f64 {
        let d = DVector::from_column_slice(v) - &self.mean;
        d.dot(&self.cholesky.solve(&d))
    }
}

/// `D_M = (S(x) - μ̂)ᵀ Σ̂⁻¹ (S(x) - μ̂)` with moments from one simulation batch
/// and the null distribution of `D_M` from a second, disjoint batch.
pub fn mahalanobis_test(
    model: &ErgmModel,
    observed: &Graph,
    stats: &StatVector,
    mc: &MonteCarlo,
) -> Result<TestReport> {
    let started = Instant::now();
    mc.validate()?;
    model.check_graph(observed)?;
    let first = mc.simulate(model, STREAM_NULL, mc.m);
    let second = mc.simulate(model, STREAM_SECOND, mc.m);
    let mut rows = vec![stats.evaluate(observed)?];
    for g in first.iter().chain(&second) {
        rows.push(stats.evaluate(g)?);
    }
    let rows = pad(rows);
    let dim = rows[0].len();
    if mc.m <= dim {
        return Err(Error::Config(format!(
            "need more simulations ({}) than statistic dimensions ({dim})",
            mc.m
        )));
    }
    let moments = Moments::estimate(&rows[1..=mc.m])?;
    let statistic = moments.distance(&rows[0]);
    let null_stats: Vec<f64> = rows[mc.m + 1..].iter().map(|r| moments.distance(r)).collect();
    let test = match stats {
        StatVector::Summary(SummaryKind::Degree) => "md-degree",
        _ => "mahalanobis",
    };
    let meta = ReportMeta { test, alpha: mc.alpha, b: None, m: mc.m, seed: mc.seed, kernel: None };
    Ok(TestReport::assemble(meta, statistic, null_stats, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StatKind;

    fn null_model() -> ErgmModel {
        ErgmModel::e2st(12, [-2.0, 0.0, 0.01]).unwrap()
    }

    fn quick(m: usize, seed: u64) -> MonteCarlo {
        MonteCarlo { m, alpha: 0.05, seed, glauber: GlauberConfig { burn_in: 30, thin: 2 } }
    }

    #[test]
    fn degree_variance_examples() {
        assert_eq!(degree_variance(&Graph::complete(6)), 0.0);
        let n = 7;
        let star = Graph::from_edges(n, &(1..n).map(|v| (0, v)).collect::<Vec<_>>()).unwrap();
        // degrees (n-1, 1, ..., 1): mean 2(n-1)/n
        let nf = n as f64;
        let mean = 2.0 * (nf - 1.0) / nf;
        let expected = ((nf - 1.0 - mean).powi(2) + (nf - 1.0) * (1.0 - mean).powi(2)) / (nf - 1.0);
        assert!((degree_variance(&star) - expected).abs() < 1e-12);
    }

    #[test]
    fn gkss_test_is_deterministic_and_consistent() {
        let model = null_model();
        let obs = mc_sample(&model, 3);
        let params = GkssParams::new(KernelSpec::wl(3), 20);
        let a = gkss_test(&model, &obs, &params, &quick(20, 9)).unwrap();
        let b = gkss_test(&model, &obs, &params, &quick(20, 9)).unwrap();
        assert_eq!(a.null_stats, b.null_stats);
        assert_eq!(a.statistic, b.statistic);
        assert!(a.invariants_hold());
        assert_eq!(a.null_stats.len(), 20);
        assert!(gkss_test(&model, &obs, &params, &quick(19, 9)).is_err());
        assert!(gkss_test(&model, &Graph::empty(5), &params, &quick(20, 9)).is_err());
    }

    fn mc_sample(model: &ErgmModel, seed: u64) -> Graph {
        glauber_sample_with(model, 1, GlauberConfig { burn_in: 50, thin: 1 }, rng::stream(seed, 99)).remove(0)
    }

    #[test]
    fn dense_observation_is_rejected_by_every_test() {
        let model = null_model();
        let dense = Graph::erdos_renyi(12, 0.6, &mut rng::stream(5, 0));
        let mc = quick(40, 11);
        let params = GkssParams::new(KernelSpec::wl(3), 30);
        assert!(gkss_test(&model, &dense, &params, &mc).unwrap().reject);
        assert!(mgra_tv_test(&model, &dense, SummaryKind::Degree, 10, &mc).unwrap().reject);
        let stats = StatVector::Statistics(vec![
            StatisticSpec::raw(StatKind::Edges),
            StatisticSpec::raw(StatKind::TwoStar),
        ]);
        assert!(mahalanobis_test(&model, &dense, &stats, &mc).unwrap().reject);
        let two = degree_variance_test(&model, &dense, Sidedness::TwoSided, &mc).unwrap();
        assert!(two.invariants_hold());
    }

    #[test]
    fn mgra_tv_needs_enough_comparisons() {
        let model = null_model();
        assert!(mgra_tv_test(&model, &Graph::empty(12), SummaryKind::Degree, 9, &quick(20, 1)).is_err());
    }

    #[test]
    fn mahalanobis_scalar_reduction() {
        let rows = vec![vec![1.0], vec![2.0], vec![4.0], vec![5.0]];
        let m = Moments::estimate(&rows).unwrap();
        let var = 10.0 / 3.0 * (1.0 + 1e-8);
        assert!((m.distance(&[3.0])).abs() < 1e-15);
        assert!((m.distance(&[6.0]) - 9.0 / var).abs() < 1e-12);
        assert!(matches!(
            Moments::estimate(&[vec![1.0, 2.0], vec![1.0, 2.0]]),
            Err(Error::RankDeficient(c)) if c == vec![0, 1]
        ));
    }
}
