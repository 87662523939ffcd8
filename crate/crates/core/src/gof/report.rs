use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub null_stats: Vec<f64>,
    /// Empirical `(1 - α)` quantile of `null_stats`.
    pub threshold: f64,
    /// `(1 + #{null >= statistic}) / (len + 1)`.
    pub p_value: f64,
    /// `statistic > threshold`.
    pub reject: bool,
    pub alpha: f64,
    #[serde(rename = "B")]
    pub b: Option<usize>,
    pub m: usize,
    pub seed: u64,
    pub kernel: Option<String>,
    pub wall_time_ms: f64,
}

/// Sorted ascending, the value at index `⌈(1 - α) m⌉ - 1`.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    // guard against (1 - α) m landing a rounding error above an integer
    let rank = ((1.0 - alpha) * m as f64 - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, m) - 1]
}

pub fn monte_carlo_p_value(statistic: f64, null_stats: &[f64]) -> f64 {
    let exceed = null_stats.iter().filter(|&&v| v >= statistic).count();
    (1 + exceed) as f64 / (null_stats.len() + 1) as f64
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

pub(crate) struct ReportMeta {
    pub test: &'static str,
    pub alpha: f64,
    pub b: Option<usize>,
    pub m: usize,
    pub seed: u64,
    pub kernel: Option<String>,
}

impl TestReport {
    pub(crate) fn assemble(
        meta: ReportMeta,
        statistic: f64,
        null_stats: Vec<f64>,
        started: std::time::Instant,
    ) -> Self {
        let threshold = empirical_quantile(&null_stats, meta.alpha);
        let p_value = monte_carlo_p_value(statistic, &null_stats);
        let report = TestReport {
            test: meta.test.to_string(),
            statistic,
            threshold,
            p_value,
            reject: statistic > threshold,
            alpha: meta.alpha,
            b: meta.b,
            m: meta.m,
            seed: meta.seed,
            kernel: meta.kernel,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            null_stats,
        };
        debug_assert!(report.invariants_hold());
        report
    }

    pub fn invariants_hold(&self) -> bool {
        self.reject == (self.statistic > self.threshold)
            && self.p_value == monte_carlo_p_value(self.statistic, &self.null_stats)
            && self.p_value > 0.0
            && self.p_value <= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_uses_ceiling_index() {
        let v: Vec<f64> = (1..=200).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.05), 190.0);
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.05), 19.0);
        assert_eq!(empirical_quantile(&v, 0.5), 10.0);
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0], 0.01), 3.0);
    }

    #[test]
    fn p_value_counts_ties() {
        assert_eq!(monte_carlo_p_value(2.0, &[1.0, 2.0, 3.0]), 0.75);
        assert_eq!(monte_carlo_p_value(9.0, &[1.0, 2.0, 3.0]), 0.25);
    }

    #[test]
    fn all_equal_nulls_above_observation() {
        let meta = ReportMeta { test: "t", alpha: 0.05, b: None, m: 20, seed: 0, kernel: None };
        let r = TestReport::assemble(meta, 0.5, vec![1.0; 20], std::time::Instant::now());
        assert!(!r.reject);
        assert_eq!(r.p_value, 1.0);
        assert!(r.invariants_hold());
    }
}
