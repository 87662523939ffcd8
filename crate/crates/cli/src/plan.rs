//! Power-curve experiments.
//!
//! ```toml
//! seed = 1
//! trials = 200
//! out = "power.csv"
//!
//! [model]
//! n = 20
//! beta = [-2.0, 0.0, 0.01]
//! stats = ["edges", "2star", "triangle"]
//!
//! [grid]
//! index = 1
//! values = [-0.5, 0.0, 0.5]
//!
//! [[tests]]
//! name = "gkss"
//! B = 100
//! ```
//!
//! For every grid value and trial one observation batch is simulated from the
//! null model with coefficient `grid.index` set to the grid value, and each
//! roster test runs against the unperturbed null.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gkss::config::ModelConfig;
use gkss::ergm::{glauber_sample_with, ErgmModel, GlauberConfig};
use gkss::gof::TestReport;
use gkss::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::roster::TestParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Position of the perturbed coefficient in `beta`.
    pub index: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub model: ModelConfig,
    pub grid: Grid,
    pub trials: usize,
    pub tests: Vec<TestParams>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// One JSON report per line, for every trial and test.
    #[serde(default)]
    pub reports: Option<PathBuf>,
    #[serde(default)]
    pub sampler: GlauberConfig,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub grid_value: f64,
    pub test: String,
    pub trials: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub mean_runtime_ms: f64,
}

impl ExperimentPlan {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut plan: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(dir) = path.parent() {
            for p in [&mut plan.out, &mut plan.reports].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.values.is_empty() {
            bail!("grid has no values");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.tests.is_empty() {
            bail!("test roster is empty");
        }
        if self.grid.index >= self.model.beta.len() {
            bail!(
                "grid index {} out of range for {} coefficients",
                self.grid.index,
                self.model.beta.len()
            );
        }
        for t in &self.tests {
            t.validate()?;
        }
        Ok(())
    }

    fn trial_seed(&self, grid: usize, trial: usize) -> u64 {
        rng::subseed(self.seed, (grid * self.trials + trial) as u64)
    }

    fn run_trial(&self, null: &ErgmModel, alt: &ErgmModel, grid: usize, trial: usize) -> Result<Vec<TestReport>> {
        let seed = self.trial_seed(grid, trial);
        let count = self.tests.iter().map(TestParams::needed_observations).max().unwrap_or(1);
        let observations = glauber_sample_with(alt, count, self.sampler, rng::stream(seed, 0));
        let test_seed = rng::subseed(seed, 1);
        self.tests
            .iter()
            .map(|t| {
                let k = t.needed_observations();
                t.run(null, &observations[..k], test_seed, self.sampler)
            })
            .collect()
    }

    /// Runs every grid point; rows reach `sink` as each grid point finishes.
    pub fn run(
        &self,
        base: Option<&Path>,
        mut sink: impl FnMut(&[PowerRow], &[Vec<TestReport>]) -> Result<()>,
    ) -> Result<Vec<PowerRow>> {
        self.validate()?;
        let null = self.model.build(base)?;
        let mut rows = Vec::new();
        for (g, &value) in self.grid.values.iter().enumerate() {
            let alt = null.with_coefficient(self.grid.index, value)?;
            let trials: Vec<Vec<TestReport>> = (0..self.trials)
                .into_par_iter()
                .map(|t| self.run_trial(&null, &alt, g, t))
                .collect::<Result<_>>()
                .with_context(|| format!("grid value {value}"))?;
            let point: Vec<PowerRow> = self
                .tests
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    let rejections = trials.iter().filter(|r| r[j].reject).count();
                    let runtime = trials.iter().map(|r| r[j].wall_time_ms).sum::<f64>();
                    PowerRow {
                        grid_value: value,
                        test: t.name.to_string(),
                        trials: self.trials,
                        rejections,
                        rejection_rate: rejections as f64 / self.trials as f64,
                        mean_runtime_ms: runtime / self.trials as f64,
                    }
                })
                .collect();
            sink(&point, &trials)?;
            rows.extend(point);
        }
        Ok(rows)
    }
}

pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self { writer: csv::Writer::from_writer(out) }
    }

    pub fn write(&mut self, rows: &[PowerRow]) -> Result<()> {
        for r in rows {
            self.writer.serialize(r)?;
        }
        self.writer.flush()?;
        Ok(())
    }
}
