//! Exponential random graph models.
//!
//! `P(X = x) ∝ exp(Σ_l β_l t_l(x))`. The normalising constant is never
//! needed: conditional edge probabilities and density ratios only involve
//! change statistics.

mod approx;
mod exact;
mod sampler;

pub use approx::{solve_a_star, ErApproximation, PhiConvention};
pub use exact::{exact_distribution, ExactDistribution, MAX_EXACT_PAIRS};
pub use sampler::{glauber_sample, glauber_sample_with, GlauberConfig, GlauberChain};

use crate::error::{Error, Result};
use crate::graph::{
    count_statistic, pair_of_unchecked, Graph, Scaling, StatKind, StatisticSpec,
};
use crate::graph::change_at;

#[derive(Debug, Clone, PartialEq)]
pub struct ErgmModel {
    n: usize,
    beta: Vec<f64>,
    stats: Vec<StatisticSpec>,
}

impl ErgmModel {
    /// Validates that the first statistic is the edge count, the lengths agree
    /// and every statistic shares one scaling convention.
    pub fn new(n: usize, beta: Vec<f64>, stats: Vec<StatisticSpec>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidModel(format!("need at least 2 vertices, got {n}")));
        }
        if beta.is_empty() || beta.len() != stats.len() {
            return Err(Error::InvalidModel(format!(
                "{} coefficients for {} statistics",
                beta.len(),
                stats.len()
            )));
        }
        if stats[0].kind != StatKind::Edges {
            return Err(Error::InvalidModel("the first statistic must be `edges`".into()));
        }
        if stats.iter().any(|s| s.scaling != stats[0].scaling) {
            return Err(Error::InvalidModel("statistics mix scaling conventions".into()));
        }
        if let Some(b) = beta.iter().find(|b| !b.is_finite()) {
            return Err(Error::InvalidModel(format!("non-finite coefficient {b}")));
        }
        for s in &stats {
            s.validate(n)?;
        }
        Ok(Self { n, beta, stats })
    }

    /// Bernoulli graph with log-odds `beta_edges` (raw counts).
    pub fn edges_only(n: usize, beta_edges: f64) -> Result<Self> {
        Self::new(n, vec![beta_edges], vec![StatisticSpec::raw(StatKind::Edges)])
    }

    /// Edges, 2-stars and triangles with raw counts.
    pub fn e2st(n: usize, beta: [f64; 3]) -> Result<Self> {
        Self::new(
            n,
            beta.to_vec(),
            vec![
                StatisticSpec::raw(StatKind::Edges),
                StatisticSpec::raw(StatKind::TwoStar),
                StatisticSpec::raw(StatKind::Triangle),
            ],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_pairs(&self) -> usize {
        crate::graph::num_pairs(self.n)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn stats(&self) -> &[StatisticSpec] {
        &self.stats
    }

    pub fn scaling(&self) -> Scaling {
        self.stats[0].scaling
    }

    /// Same statistics with coefficient `index` replaced.
    pub fn with_coefficient(&self, index: usize, value: f64) -> Result<Self> {
        if index >= self.beta.len() {
            return Err(Error::InvalidModel(format!(
                "coefficient index {index} out of range for {} statistics",
                self.beta.len()
            )));
        }
        let mut beta = self.beta.clone();
        beta[index] = value;
        Self::new(self.n, beta, self.stats.clone())
    }

    pub(crate) fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::Shape(format!(
                "model is on {} vertices, graph has {}",
                self.n,
                g.n()
            )));
        }
        Ok(())
    }

    /// `Σ_l β_l Δ_l(s, g)`: the log-odds of `x_s = 1` given the rest.
    #[inline]
    pub(crate) fn log_odds(&self, g: &Graph, s: usize) -> f64 {
        let (i, j) = pair_of_unchecked(s, self.n);
        self.log_odds_at(g, s, i, j)
    }

    #[inline]
    pub(crate) fn log_odds_at(&self, g: &Graph, s: usize, i: usize, j: usize) -> f64 {
        self.beta
            .iter()
            .zip(&self.stats)
            .map(|(b, spec)| b * change_at(g, s, i, j, spec))
            .sum()
    }

    /// `q(x^{(s,1)} | x_{-s})`.
    pub fn conditional_edge_prob(&self, g: &Graph, s: usize) -> Result<f64> {
        self.check_graph(g)?;
        g.check_index(s)?;
        Ok(logistic(self.log_odds(g, s)))
    }

    /// `q(x^{(s,1)} | x_{-s})` for every pair.
    pub fn conditional_edge_probs(&self, g: &Graph) -> Result<Vec<f64>> {
        self.check_graph(g)?;
        Ok((0..g.num_pairs()).map(|s| logistic(self.log_odds(g, s))).collect())
    }

    /// `Σ_l β_l t_l(g)`.
    pub fn log_unnormalized_density(&self, g: &Graph) -> Result<f64> {
        self.check_graph(g)?;
        let mut total = 0.0;
        for (b, spec) in self.beta.iter().zip(&self.stats) {
            if *b != 0.0 {
                total += b * count_statistic(g, spec)?;
            }
        }
        Ok(total)
    }
}

/// `1 / (1 + e^{-t})` without overflow for large `|t|`.
#[inline]
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
