//! Sufficient statistics and their change statistics.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::{num_pairs, pair_index, pair_of_unchecked, Graph};
use crate::error::{Error, Result};

/// Which normalisation a subgraph count carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Plain subgraph counts (`|E|`, number of 2-stars, ...).
    #[serde(rename = "raw")]
    RawCount,
    /// Edge-preserving injection counts divided by `n(n-1)...(n-v_H+3)`.
    #[serde(rename = "injection")]
    InjectionScaled,
}

/// Symmetric pair weights with zero diagonal, stored sparsely by edge index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairWeights {
    n: usize,
    weights: FxHashMap<usize, f64>,
}

impl PairWeights {
    /// From unordered `(i, j, w)` triples; a repeated pair is an error.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = FxHashMap::default();
        for &(a, b, w) in pairs {
            if a == b {
                return Err(Error::InvalidStatistic(format!(
                    "homophily weight on the diagonal at ({a}, {a})"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let s = pair_index(i, j, n)?;
            if weights.insert(s, w).is_some() {
                return Err(Error::InvalidStatistic(format!(
                    "duplicate homophily weight for pair ({i}, {j})"
                )));
            }
        }
        Ok(Self { n, weights })
    }

    /// From a dense row-major `n x n` matrix that must be symmetric with zero diagonal.
    pub fn from_dense(n: usize, matrix: &[f64]) -> Result<Self> {
        if matrix.len() != n * n {
            return Err(Error::Shape(format!(
                "homophily matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        let mut weights = FxHashMap::default();
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::InvalidStatistic(format!(
                    "homophily matrix has nonzero diagonal at {i}"
                )));
            }
            for j in i + 1..n {
                let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
                if a != b {
                    return Err(Error::InvalidStatistic(format!(
                        "homophily matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if a != 0.0 {
                    weights.insert(pair_index(i, j, n)?, a);
                }
            }
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, s: usize) -> f64 {
        self.weights.get(&s).copied().unwrap_or(0.0)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        pair_index(a, b, self.n).map(|s| self.weight(s)).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatKind {
    Edges,
    TwoStar,
    Triangle,
    KStar(usize),
    AltKStar(f64),
    Homophily(Arc<PairWeights>),
}

impl StatKind {
    /// Edge count of the subgraph `H`, when the statistic is a pure subgraph count.
    pub fn subgraph_edges(&self) -> Option<usize> {
        match self {
            StatKind::Edges => Some(1),
            StatKind::TwoStar => Some(2),
            StatKind::Triangle => Some(3),
            StatKind::KStar(k) => Some(*k),
            _ => None,
        }
    }

    /// Vertex count of the subgraph `H`, when the statistic is a pure subgraph count.
    pub fn subgraph_vertices(&self) -> Option<usize> {
        match self {
            StatKind::Edges => Some(2),
            StatKind::TwoStar => Some(3),
            StatKind::Triangle => Some(3),
            StatKind::KStar(k) => Some(k + 1),
            _ => None,
        }
    }

    /// Size of the automorphism group of `H`.
    fn automorphisms(&self) -> Option<f64> {
        match self {
            StatKind::Edges => Some(2.0),
            StatKind::TwoStar => Some(2.0),
            StatKind::Triangle => Some(6.0),
            StatKind::KStar(k) => Some(factorial(*k)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            StatKind::Edges => "edges".into(),
            StatKind::TwoStar => "2star".into(),
            StatKind::Triangle => "triangle".into(),
            StatKind::KStar(k) => format!("kstar:{k}"),
            StatKind::AltKStar(l) => format!("altkstar:{l}"),
            StatKind::Homophily(_) => "homophily".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticSpec {
    pub kind: StatKind,
    pub scaling: Scaling,
}

impl StatisticSpec {
    pub fn new(kind: StatKind, scaling: Scaling) -> Self {
        Self { kind, scaling }
    }

    pub fn raw(kind: StatKind) -> Self {
        Self::new(kind, Scaling::RawCount)
    }

    /// Checks the spec against a vertex count.
    pub fn validate(&self, n: usize) -> Result<()> {
        match &self.kind {
            StatKind::KStar(k) if *k < 2 || *k + 1 > n => Err(Error::InvalidStatistic(format!(
                "kstar:{k} needs 2 <= k <= n-1 (n = {n})"
            ))),
            StatKind::AltKStar(l) if !(*l > 0.0) || !l.is_finite() => Err(
                Error::InvalidStatistic(format!("altkstar needs lambda > 0, got {l}")),
            ),
            StatKind::Homophily(p) if p.n() != n => Err(Error::Shape(format!(
                "homophily matrix is for n = {}, graph has n = {n}",
                p.n()
            ))),
            StatKind::AltKStar(_) | StatKind::Homophily(_)
                if self.scaling == Scaling::InjectionScaled =>
            {
                Err(Error::InvalidStatistic(format!(
                    "{} has no injection-scaled form",
                    self.kind.name()
                )))
            }
            _ => Ok(()),
        }
    }

    /// Multiplier taking a raw subgraph count to its injection-scaled value.
    fn injection_factor(&self, n: usize) -> f64 {
        match self.scaling {
            Scaling::RawCount => 1.0,
            Scaling::InjectionScaled => {
                let aut = self.kind.automorphisms().unwrap_or(1.0);
                let v = self.kind.subgraph_vertices().unwrap_or(2);
                // n (n-1) ... (n - v + 3): v - 2 factors
                let divisor = falling(n, v.saturating_sub(2));
                aut / divisor
            }
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `n (n-1) ... (n-k+1)`.
fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// `C(d, k)` in floating point.
pub(crate) fn binomial(d: usize, k: usize) -> f64 {
    if k > d {
        return 0.0;
    }
    let k = k.min(d - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (d - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `Σ_{k>=2} (-1/λ)^{k-2} C(d, k)` summed in closed form via the binomial theorem.
fn alt_kstar_vertex(d: usize, lambda: f64) -> f64 {
    let r = 1.0 / lambda;
    ((1.0 - r).powi(d as i32) - 1.0 + r * d as f64) / (r * r)
}

fn triangles(g: &Graph) -> f64 {
    let mut t = 0usize;
    for (i, j) in g.edge_list() {
        t += g.common_neighbours(i, j);
    }
    t as f64 / 3.0
}

/// Value of a sufficient statistic on `g`.
pub fn count_statistic(g: &Graph, spec: &StatisticSpec) -> Result<f64> {
    spec.validate(g.n())?;
    let raw = match &spec.kind {
        StatKind::Edges => g.edge_count() as f64,
        StatKind::TwoStar => g.degrees().iter().map(|&d| binomial(d as usize, 2)).sum(),
        StatKind::Triangle => triangles(g),
        StatKind::KStar(k) => g.degrees().iter().map(|&d| binomial(d as usize, *k)).sum(),
        StatKind::AltKStar(lambda) => g
            .degrees()
            .iter()
            .map(|&d| alt_kstar_vertex(d as usize, *lambda))
            .sum(),
        StatKind::Homophily(p) => (0..num_pairs(g.n()))
            .filter(|&s| g.edge(s))
            .map(|s| p.weight(s))
            .sum(),
    };
    Ok(raw * spec.injection_factor(g.n()))
}

/// `t(x^{(s,1)}) - t(x^{(s,0)})`, independent of the current value of `x_s`.
pub fn change_statistic(g: &Graph, s: usize, spec: &StatisticSpec) -> Result<f64> {
    g.check_index(s)?;
    spec.validate(g.n())?;
    Ok(change_unchecked(g, s, spec))
}

/// [`change_statistic`] without validation; used in sampling inner loops.
#[inline]
pub(crate) fn change_unchecked(g: &Graph, s: usize, spec: &StatisticSpec) -> f64 {
    let (i, j) = pair_of_unchecked(s, g.n());
    change_at(g, s, i, j, spec)
}

#[inline]
pub(crate) fn change_at(g: &Graph, s: usize, i: usize, j: usize, spec: &StatisticSpec) -> f64 {
    let present = g.edge(s) as usize;
    // degrees with the pair s absent
    let di = g.degree(i) - present;
    let dj = g.degree(j) - present;
    let raw = match &spec.kind {
        StatKind::Edges => 1.0,
        StatKind::TwoStar => (di + dj) as f64,
        StatKind::Triangle => g.common_neighbours(i, j) as f64,
        StatKind::KStar(k) => binomial(di, k - 1) + binomial(dj, k - 1),
        StatKind::AltKStar(lambda) => {
            alt_kstar_vertex(di + 1, *lambda) - alt_kstar_vertex(di, *lambda)
                + alt_kstar_vertex(dj + 1, *lambda)
                - alt_kstar_vertex(dj, *lambda)
        }
        StatKind::Homophily(p) => p.weight(s),
    };
    raw * spec.injection_factor(g.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_specs(n: usize, rng: &mut ChaCha8Rng) -> Vec<StatisticSpec> {
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = rng.gen_range(-1.0..1.0);
                dense[i * n + j] = w;
                dense[j * n + i] = w;
            }
        }
        let p = Arc::new(PairWeights::from_dense(n, &dense).unwrap());
        let mut specs = vec![];
        for scaling in [Scaling::RawCount, Scaling::InjectionScaled] {
            for kind in [StatKind::Edges, StatKind::TwoStar, StatKind::Triangle, StatKind::KStar(3)] {
                specs.push(StatisticSpec::new(kind, scaling));
            }
        }
        specs.push(StatisticSpec::raw(StatKind::AltKStar(0.4975)));
        specs.push(StatisticSpec::raw(StatKind::AltKStar(2.0)));
        specs.push(StatisticSpec::raw(StatKind::Homophily(p)));
        specs
    }

    /// Number of edge-preserving injections of the k-star into g, by enumeration.
    fn kstar_injections(g: &Graph, k: usize) -> usize {
        fn extend(g: &Graph, centre: usize, chosen: &mut Vec<usize>, k: usize) -> usize {
            if chosen.len() == k {
                return 1;
            }
            let mut total = 0;
            for v in 0..g.n() {
                if v != centre && !chosen.contains(&v) && g.has_edge(centre, v) {
                    chosen.push(v);
                    total += extend(g, centre, chosen, k);
                    chosen.pop();
                }
            }
            total
        }
        (0..g.n()).map(|c| extend(g, c, &mut vec![], k)).sum()
    }

    #[test]
    fn k3_counts() {
        let k3 = Graph::complete(3);
        let tri = StatisticSpec::raw(StatKind::Triangle);
        assert_eq!(count_statistic(&k3, &tri).unwrap(), 1.0);
        assert_eq!(count_statistic(&k3, &StatisticSpec::raw(StatKind::TwoStar)).unwrap(), 3.0);
        let tri_inj = StatisticSpec::new(StatKind::Triangle, Scaling::InjectionScaled);
        assert!((count_statistic(&k3, &tri_inj).unwrap() - 2.0).abs() < 1e-15);
        let edge_inj = StatisticSpec::new(StatKind::Edges, Scaling::InjectionScaled);
        assert_eq!(count_statistic(&k3, &edge_inj).unwrap(), 6.0);
    }

    #[test]
    fn kstar_matches_injection_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = Graph::erdos_renyi(6, 0.5, &mut rng);
            let raw = count_statistic(&g, &StatisticSpec::raw(StatKind::KStar(3))).unwrap();
            assert_eq!(raw, kstar_injections(&g, 3) as f64 / 6.0);
            let scaled =
                count_statistic(&g, &StatisticSpec::new(StatKind::KStar(3), Scaling::InjectionScaled))
                    .unwrap();
            let expect = kstar_injections(&g, 3) as f64 / (6.0 * 5.0);
            assert!((scaled - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn alt_kstar_matches_literal_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for lambda in [0.4975f64, 1.0, 2.5] {
            let g = Graph::erdos_renyi(12, 0.4, &mut rng);
            let literal: f64 = (2..g.n())
                .map(|k| {
                    let sk: f64 = g.degrees().iter().map(|&d| binomial(d as usize, k)).sum();
                    (-1.0 / lambda).powi(k as i32 - 2) * sk
                })
                .sum();
            let got = count_statistic(&g, &StatisticSpec::raw(StatKind::AltKStar(lambda))).unwrap();
            assert!((got - literal).abs() < 1e-9 * literal.abs().max(1.0), "{got} vs {literal}");
        }
    }

    #[test]
    fn change_statistic_examples() {
        let g = Graph::empty(5);
        for s in 0..10 {
            assert_eq!(change_statistic(&g, s, &StatisticSpec::raw(StatKind::TwoStar)).unwrap(), 0.0);
        }
        let s01 = pair_index(0, 1, 3).unwrap();
        let g = Graph::complete(3).with_edge(s01, false).unwrap();
        assert_eq!(change_statistic(&g, s01, &StatisticSpec::raw(StatKind::Triangle)).unwrap(), 1.0);
    }

    #[test]
    fn change_matches_double_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 7;
        let specs = all_specs(n, &mut rng);
        for _ in 0..100 {
            let g = Graph::erdos_renyi(n, rng.gen_range(0.1..0.9), &mut rng);
            let s = rng.gen_range(0..g.num_pairs());
            for spec in &specs {
                let hi = count_statistic(&g.with_edge(s, true).unwrap(), spec).unwrap();
                let lo = count_statistic(&g.with_edge(s, false).unwrap(), spec).unwrap();
                let d = change_statistic(&g, s, spec).unwrap();
                assert!((d - (hi - lo)).abs() < 1e-12 * (1.0 + d.abs()), "{spec:?}: {d} vs {}", hi - lo);
            }
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let g = Graph::empty(4);
        assert!(count_statistic(&g, &StatisticSpec::raw(StatKind::KStar(4))).is_err());
        assert!(count_statistic(&g, &StatisticSpec::raw(StatKind::KStar(1))).is_err());
        assert!(count_statistic(&g, &StatisticSpec::raw(StatKind::AltKStar(0.0))).is_err());
        let p = Arc::new(PairWeights::from_pairs(5, &[(0, 1, 1.0)]).unwrap());
        assert!(matches!(
            count_statistic(&g, &StatisticSpec::raw(StatKind::Homophily(p))),
            Err(Error::Shape(_))
        ));
        assert!(PairWeights::from_dense(2, &[0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(PairWeights::from_dense(2, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn homophily_sums_weights_over_edges() {
        let p = Arc::new(PairWeights::from_pairs(4, &[(1, 0, 0.5), (2, 3, 2.0)]).unwrap());
        let g = Graph::from_edges(4, &[(0, 1), (2, 3), (0, 3)]).unwrap();
        assert_eq!(count_statistic(&g, &StatisticSpec::raw(StatKind::Homophily(p))).unwrap(), 2.5);
    }
}
