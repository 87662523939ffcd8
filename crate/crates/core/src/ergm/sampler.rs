//! Glauber dynamics.
//!
//! One elementary step picks a vertex pair uniformly and redraws its indicator
//! from the conditional law given all other indicators. A sweep is `N`
//! elementary steps.

use rand::Rng;

use super::{logistic, ErgmModel};
use crate::error::{Error, Result};
use crate::graph::{pair_of_unchecked, Graph};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GlauberConfig {
    /// Sweeps discarded before the first sample.
    pub burn_in: usize,
    /// Sweeps between consecutive samples.
    pub thin: usize,
}

impl Default for GlauberConfig {
    fn default() -> Self {
        Self { burn_in: 200, thin: 10 }
    }
}

/// A running chain over graphs on the model's vertex set.
pub struct GlauberChain<'a, R: Rng> {
    model: &'a ErgmModel,
    state: Graph,
    pairs: Vec<(u32, u32)>,
    rng: R,
}

impl<'a, R: Rng> GlauberChain<'a, R> {
    /// Starts from a Bernoulli draw with the edges-only conditional probability
    /// `σ(β_1 Δ_edges)`.
    pub fn new(model: &'a ErgmModel, mut rng: R) -> Self {
        let n = model.n();
        let empty = Graph::empty(n);
        let p0 = logistic(model.beta()[0] * crate::graph::change_at(&empty, 0, 0, 1, &model.stats()[0]));
        let state = Graph::erdos_renyi(n, p0, &mut rng);
        Self::from_state(model, state, rng)
    }

    pub fn from_state(model: &'a ErgmModel, state: Graph, rng: R) -> Self {
        let n = model.n();
        let pairs = (0..model.num_pairs())
            .map(|s| {
                let (i, j) = pair_of_unchecked(s, n);
                (i as u32, j as u32)
            })
            .collect();
        Self { model, state, pairs, rng }
    }

    pub fn state(&self) -> &Graph {
        &self.state
    }

    #[inline]
    pub fn step(&mut self) {
        let s = self.rng.gen_range(0..self.pairs.len());
        let (i, j) = self.pairs[s];
        let p = logistic(self.model.log_odds_at(&self.state, s, i as usize, j as usize));
        let bit = self.rng.gen::<f64>() < p;
        self.state.set_edge(s, bit);
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.pairs.len() {
            self.step();
        }
    }

    pub fn advance(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }
}

/// `m` samples taken every `thin` sweeps after `burn_in` sweeps, from one chain.
pub fn glauber_sample_with<R: Rng>(
    model: &ErgmModel,
    m: usize,
    config: GlauberConfig,
    rng: R,
) -> Vec<Graph> {
    let mut chain = GlauberChain::new(model, rng);
    chain.advance(config.burn_in);
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        if k > 0 {
            chain.advance(config.thin);
        }
        out.push(chain.state().clone());
    }
    out
}

pub fn glauber_sample(
    model: &ErgmModel,
    m: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<Vec<Graph>> {
    if m == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    Ok(glauber_sample_with(model, m, GlauberConfig { burn_in, thin }, rng::stream(seed, 0)))
}
