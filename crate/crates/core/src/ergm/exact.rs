use super::ErgmModel;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest `N` for which all `2^N` graphs are enumerated.
pub const MAX_EXACT_PAIRS: usize = 15;

/// Probabilities of every graph on `n` vertices, indexed by indicator mask
/// (bit `s` of the index is `x_s`).
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, g: &Graph) -> f64 {
        self.probs[g.mask() as usize]
    }

    pub fn graphs(&self) -> impl Iterator<Item = (Graph, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(mask, &p)| (Graph::from_mask(self.n, mask as u64), p))
    }

    /// Total variation distance between the empirical law of `samples` and this one.
    pub fn tv_distance(&self, samples: &[Graph]) -> f64 {
        let mut counts = vec![0usize; self.probs.len()];
        for g in samples {
            counts[g.mask() as usize] += 1;
        }
        let m = samples.len() as f64;
        0.5 * counts
            .iter()
            .zip(&self.probs)
            .map(|(&c, &p)| (c as f64 / m - p).abs())
            .sum::<f64>()
    }
}

/// Enumerates and normalises the model by explicit summation.
pub fn exact_distribution(model: &ErgmModel) -> Result<ExactDistribution> {
    let pairs = model.num_pairs();
    if pairs > MAX_EXACT_PAIRS {
        return Err(Error::Capacity(format!(
            "exact enumeration needs N <= {MAX_EXACT_PAIRS}, model has N = {pairs}"
        )));
    }
    let n = model.n();
    let mut logp = Vec::with_capacity(1 << pairs);
    for mask in 0..1u64 << pairs {
        logp.push(model.log_unnormalized_density(&Graph::from_mask(n, mask))?);
    }
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    Ok(ExactDistribution { n, probs })
}
