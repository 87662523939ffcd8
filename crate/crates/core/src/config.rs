//! TOML model configuration.
//!
//! ```toml
//! n = 20
//! beta = [-2.0, 0.0, 0.01]
//! stats = ["edges", "2star", "triangle"]
//! scaling = "raw"
//! ```
//!
//! `homophily:<path>` reads a pair list of `i j w` lines; a relative path is
//! resolved against the directory of the config file.

use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ergm::ErgmModel;
use crate::error::{Error, Result};
use crate::graph::{PairWeights, Scaling, StatKind, StatisticSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub beta: Vec<f64>,
    pub stats: Vec<String>,
    #[serde(default = "default_scaling")]
    pub scaling: Scaling,
}

fn default_scaling() -> Scaling {
    Scaling::RawCount
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model config serialises")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    /// Builds the model; `base` anchors relative homophily paths.
    pub fn build(&self, base: Option<&Path>) -> Result<ErgmModel> {
        let stats = self
            .stats
            .iter()
            .map(|s| parse_statistic(s, self.n, self.scaling, base))
            .collect::<Result<Vec<_>>>()?;
        ErgmModel::new(self.n, self.beta.clone(), stats)
    }
}

/// Reads and builds the model in a config file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ErgmModel> {
    let path = path.as_ref();
    ModelConfig::read(path)?.build(path.parent())
}

pub fn parse_statistic(
    text: &str,
    n: usize,
    scaling: Scaling,
    base: Option<&Path>,
) -> Result<StatisticSpec> {
    let (head, arg) = match text.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (text, None),
    };
    let bad = || Error::Config(format!("unrecognised statistic `{text}`"));
    let kind = match (head, arg) {
        ("edges", None) => StatKind::Edges,
        ("2star", None) => StatKind::TwoStar,
        ("triangle", None) => StatKind::Triangle,
        ("kstar", Some(k)) => StatKind::KStar(k.parse().map_err(|_| bad())?),
        ("altkstar", Some(l)) => StatKind::AltKStar(l.parse().map_err(|_| bad())?),
        ("homophily", Some(p)) => {
            let mut path = PathBuf::from(p);
            if let Some(base) = base.filter(|_| path.is_relative()) {
                path = base.join(path);
            }
            let file = std::fs::File::open(&path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            StatKind::Homophily(Arc::new(parse_pair_weights(n, std::io::BufReader::new(file))?))
        }
        _ => return Err(bad()),
    };
    Ok(StatisticSpec::new(kind, scaling))
}

/// Parses `i j w` lines; blank lines and `#` comments are skipped.
pub fn parse_pair_weights<R: BufRead>(n: usize, reader: R) -> Result<PairWeights> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = || Error::Parse { line: idx + 1, message: format!("expected `i j w`, found `{trimmed}`") };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err());
        }
        let i: usize = fields[0].parse().map_err(|_| err())?;
        let j: usize = fields[1].parse().map_err(|_| err())?;
        let w: f64 = fields[2].parse().map_err(|_| err())?;
        if i >= n || j >= n {
            return Err(Error::Parse { line: idx + 1, message: format!("vertex out of range (n = {n})") });
        }
        pairs.push((i, j, w));
    }
    PairWeights::from_pairs(n, &pairs)
}
