//! Named tests and the parameters each one needs.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use gkss::ergm::{ErgmModel, GlauberConfig};
use gkss::gof::{
    degree_variance_test, gkss_test, gksd_multi_test, kdsd_multi_test, mahalanobis_test, mgra_tv_test,
    GkssParams, MonteCarlo, MultiParams, Sidedness, StatVector, TestReport, DEFAULT_BOOTSTRAP,
};
use gkss::graph::{Graph, SummaryKind};
use gkss::kernels::KernelSpec;
use gkss::stein::SteinMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestKind {
    Gkss,
    Degree,
    MgraDegree,
    MgraEspart,
    MdDegree,
    Gksd,
    Kdsd,
}

impl TestKind {
    pub const ALL: [TestKind; 7] = [
        TestKind::Gkss,
        TestKind::Degree,
        TestKind::MgraDegree,
        TestKind::MgraEspart,
        TestKind::MdDegree,
        TestKind::Gksd,
        TestKind::Kdsd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Gkss => "gkss",
            TestKind::Degree => "degree",
            TestKind::MgraDegree => "mgra-degree",
            TestKind::MgraEspart => "mgra-espart",
            TestKind::MdDegree => "md-degree",
            TestKind::Gksd => "gksd",
            TestKind::Kdsd => "kdsd",
        }
    }

    pub fn is_multi(self) -> bool {
        matches!(self, TestKind::Gksd | TestKind::Kdsd)
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TestKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = TestKind::ALL.iter().map(|k| k.name()).collect();
            format!("unknown test `{s}` (expected one of {})", names.join(", "))
        })
    }
}

impl TryFrom<String> for TestKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<TestKind> for String {
    fn from(k: TestKind) -> String {
        k.name().to_string()
    }
}

fn default_alpha() -> f64 {
    0.05
}
fn default_b() -> usize {
    100
}
fn default_m() -> usize {
    200
}
fn default_m_prime() -> usize {
    20
}
fn default_kernel() -> String {
    KernelSpec::default().to_string()
}
fn default_observations() -> usize {
    30
}
fn default_n_boot() -> usize {
    DEFAULT_BOOTSTRAP
}

/// One roster entry; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestParams {
    pub name: TestKind,
    #[serde(rename = "B", default = "default_b")]
    pub b: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    #[serde(default)]
    pub mode: SteinMode,
    /// Comparison simulations per mGra statistic.
    #[serde(default = "default_m_prime")]
    pub m_prime: usize,
    #[serde(default)]
    pub sided: Sidedness,
    /// Observed networks per trial for the multi-sample tests.
    #[serde(default = "default_observations")]
    pub observations: usize,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
    /// Pairs drawn per network by the multi-sample tests; all pairs when absent.
    #[serde(default)]
    pub multi_b: Option<usize>,
}

impl TestParams {
    pub fn new(name: TestKind) -> Self {
        Self {
            name,
            b: default_b(),
            m: default_m(),
            alpha: default_alpha(),
            kernel: default_kernel(),
            mode: SteinMode::Direct,
            m_prime: default_m_prime(),
            sided: Sidedness::Upper,
            observations: default_observations(),
            n_boot: default_n_boot(),
            multi_b: None,
        }
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let spec: KernelSpec = self
            .kernel
            .parse()
            .map_err(|e| anyhow::anyhow!("{e}"))
            .with_context(|| format!("kernel `{}`", self.kernel))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Observed networks one run consumes.
    pub fn needed_observations(&self) -> usize {
        if self.name.is_multi() {
            self.observations
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("{}: alpha must lie in (0, 1)", self.name);
        }
        match self.name {
            TestKind::Gkss => {
                self.kernel_spec()?;
                if self.b == 0 {
                    bail!("gkss: B must be at least 1");
                }
            }
            TestKind::Gksd | TestKind::Kdsd => {
                self.kernel_spec()?;
                if self.observations < 2 {
                    bail!("{}: needs at least 2 observations", self.name);
                }
            }
            TestKind::MgraDegree | TestKind::MgraEspart if self.m_prime < 10 => {
                bail!("{}: m_prime must be at least 10", self.name);
            }
            _ => {}
        }
        Ok(())
    }

    /// Runs the test; single-network tests use the first observation.
    pub fn run(
        &self,
        model: &ErgmModel,
        observations: &[Graph],
        seed: u64,
        glauber: GlauberConfig,
    ) -> Result<TestReport> {
        let Some(first) = observations.first() else {
            bail!("{}: no observed network", self.name);
        };
        let mc = MonteCarlo { m: self.m, alpha: self.alpha, seed, glauber };
        let report = match self.name {
            TestKind::Gkss => {
                let params = GkssParams { spec: self.kernel_spec()?, b: self.b, mode: self.mode };
                gkss_test(model, first, &params, &mc)?
            }
            TestKind::Degree => degree_variance_test(model, first, self.sided, &mc)?,
            TestKind::MgraDegree => mgra_tv_test(model, first, SummaryKind::Degree, self.m_prime, &mc)?,
            TestKind::MgraEspart => {
                mgra_tv_test(model, first, SummaryKind::EdgewiseSharedPartners, self.m_prime, &mc)?
            }
            TestKind::MdDegree => {
                mahalanobis_test(model, first, &StatVector::Summary(SummaryKind::Degree), &mc)?
            }
            TestKind::Gksd | TestKind::Kdsd => {
                let params = MultiParams {
                    spec: self.kernel_spec()?,
                    alpha: self.alpha,
                    n_boot: self.n_boot,
                    seed,
                    b: self.multi_b,
                    mode: self.mode,
                };
                if self.name == TestKind::Gksd {
                    gksd_multi_test(model, observations, &params)?
                } else {
                    kdsd_multi_test(model, observations, &params)?
                }
            }
        };
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in TestKind::ALL {
            assert_eq!(k.name().parse::<TestKind>().unwrap(), k);
        }
        assert!("mgra".parse::<TestKind>().is_err());
    }

    #[test]
    fn params_fill_defaults() {
        let p: TestParams = toml::from_str("name = \"gkss\"\nB = 50\n").unwrap();
        assert_eq!(p, TestParams { b: 50, ..TestParams::new(TestKind::Gkss) });
        assert!(toml::from_str::<TestParams>("name = \"gkss\"\nb = 50\n").is_err());
        assert!(toml::from_str::<TestParams>("name = \"nope\"\n").is_err());
    }

    #[test]
    fn validation() {
        let mut p = TestParams::new(TestKind::Gkss);
        p.validate().unwrap();
        p.kernel = "wl:x".into();
        assert!(p.validate().is_err());
        let mut p = TestParams::new(TestKind::MgraEspart);
        p.m_prime = 9;
        assert!(p.validate().is_err());
        let mut p = TestParams::new(TestKind::Kdsd);
        p.observations = 1;
        assert!(p.validate().is_err());
    }
}
