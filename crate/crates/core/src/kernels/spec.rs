use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// Weisfeiler-Lehman subtree kernel with `levels` refinement rounds.
    Wl { levels: usize },
    /// Shortest-path kernel: matching path lengths between vertex pairs.
    ShortestPath,
    /// Gaussian on vertex-edge label histograms, vertex `i` labelled `i`.
    Veg { sigma: f64 },
    /// Geometric random walk on the direct product graph.
    Grw { lambda: f64 },
    /// Random walks up to length `weights.len() - 1`, weight `weights[t]` on length `t`.
    KStepRw { weights: Vec<f64> },
    /// Gaussian on edge indicator vectors, `exp(-Σ_s (g_s - h_s)² / σ²)`.
    GaussAdj { sigma: f64 },
    /// `|E(g)| · |E(h)|`.
    EdgeCountProduct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Cosine normalisation `k(g,h) / sqrt(k(g,g) k(h,h))`.
    pub normalize: bool,
}

impl KernelSpec {
    pub fn new(family: KernelFamily) -> Self {
        Self { family, normalize: false }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize = true;
        self
    }

    pub fn wl(levels: usize) -> Self {
        Self::new(KernelFamily::Wl { levels })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.family {
            KernelFamily::Veg { sigma } | KernelFamily::GaussAdj { sigma }
                if !(*sigma > 0.0 && sigma.is_finite()) =>
            {
                bad(format!("kernel bandwidth must be positive, got {sigma}"))
            }
            KernelFamily::Grw { lambda } if !(*lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("walk decay must be positive, got {lambda}"))
            }
            KernelFamily::KStepRw { weights } if weights.is_empty() => {
                bad("k-step walk kernel needs at least one weight".into())
            }
            _ => Ok(()),
        }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::wl(5)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            KernelFamily::Wl { levels } => write!(f, "wl:{levels}")?,
            KernelFamily::ShortestPath => write!(f, "sp")?,
            KernelFamily::Veg { sigma } => write!(f, "veg:{sigma}")?,
            KernelFamily::Grw { lambda } => write!(f, "grw:{lambda}")?,
            KernelFamily::KStepRw { weights } => {
                let w: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
                write!(f, "kstep:{}", w.join(","))?
            }
            KernelFamily::GaussAdj { sigma } => write!(f, "gaussadj:{sigma}")?,
            KernelFamily::EdgeCountProduct => write!(f, "edgecount")?,
        }
        if self.normalize {
            write!(f, ":norm")?;
        }
        Ok(())
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// `wl:5`, `sp`, `veg:1.0`, `grw:0.3333`, `kstep:1,0.5`, `gaussadj:1.0`,
    /// `edgecount`, each optionally followed by `:norm`.
    fn from_str(text: &str) -> Result<Self> {
        let mut parts: Vec<&str> = text.trim().split(':').collect();
        let normalize = parts.last() == Some(&"norm") && parts.len() > 1;
        if normalize {
            parts.pop();
        }
        let bad = || Error::Config(format!("unrecognised kernel `{text}`"));
        let num = |s: Option<&&str>, default: f64| -> Result<f64> {
            match s {
                None => Ok(default),
                Some(v) => v.parse().map_err(|_| bad()),
            }
        };
        if parts.len() > 2 {
            return Err(bad());
        }
        let arg = parts.get(1);
        let family = match parts[0].to_ascii_lowercase().as_str() {
            "wl" => KernelFamily::Wl {
                levels: match arg {
                    None => 5,
                    Some(v) => v.parse().map_err(|_| bad())?,
                },
            },
            "sp" if arg.is_none() => KernelFamily::ShortestPath,
            "veg" => KernelFamily::Veg { sigma: num(arg, 1.0)? },
            "grw" => KernelFamily::Grw { lambda: num(arg, 1.0 / 3.0)? },
            "kstep" => KernelFamily::KStepRw {
                weights: arg
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|w| w.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            },
            "gaussadj" => KernelFamily::GaussAdj { sigma: num(arg, 1.0)? },
            "edgecount" if arg.is_none() => KernelFamily::EdgeCountProduct,
            _ => return Err(bad()),
        };
        let spec = KernelSpec { family, normalize };
        spec.validate()?;
        Ok(spec)
    }
}
