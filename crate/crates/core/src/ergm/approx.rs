//! The Bernoulli approximation `ER(a*)` of an ERGM.
//!
//! With `e_l` the edge count of `H_l`, `Φ(a) = Σ_l β_l e_l a^{e_l - 1}` and
//! `a*` is a fixed point of `φ`, where `φ(a) = (1 + tanh Φ(a)) / 2` in the
//! tanh-half convention and `φ(a) = σ(Φ(a))` in the sigmoid convention.

use super::{logistic, ErgmModel};
use crate::error::{Error, Result};
use crate::graph::Scaling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiConvention {
    #[serde(rename = "tanh")]
    TanhHalf,
    Sigmoid,
}

impl PhiConvention {
    /// Sigmoid for raw counts (edges-only models then give `a* = σ(β_1)`),
    /// tanh-half for injection-scaled statistics.
    pub fn default_for(scaling: Scaling) -> Self {
        match scaling {
            Scaling::RawCount => PhiConvention::Sigmoid,
            Scaling::InjectionScaled => PhiConvention::TanhHalf,
        }
    }

    fn apply(self, phi: f64) -> f64 {
        match self {
            PhiConvention::TanhHalf => (1.0 + phi.tanh()) / 2.0,
            PhiConvention::Sigmoid => logistic(phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErApproximation {
    pub a_star: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `1 - ½ Σ_l |β_l| e_l (e_l - 1)`; Assumption 1 (1) holds when positive.
    pub assumption1_margin: f64,
    pub convention: PhiConvention,
    /// `|φ(a*) - a*|` at the returned iterate.
    pub residual: f64,
    /// Iterates visited, starting from `a_0 = 0.5`.
    pub trace: Vec<f64>,
}

struct Polynomial {
    terms: Vec<(f64, usize)>,
}

impl Polynomial {
    fn phi(&self, a: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(b, e)| b * e as f64 * a.powi(e as i32 - 1))
            .sum()
    }
}

pub fn solve_a_star(
    model: &ErgmModel,
    convention: PhiConvention,
    tol: f64,
    max_iter: usize,
) -> Result<ErApproximation> {
    let mut terms = Vec::with_capacity(model.beta().len());
    for (b, spec) in model.beta().iter().zip(model.stats()) {
        let e = spec
            .kind
            .subgraph_edges()
            .ok_or_else(|| Error::UnsupportedStatistic(spec.kind.name()))?;
        terms.push((*b, e));
    }
    let margin = 1.0
        - 0.5
            * terms
                .iter()
                .map(|&(b, e)| b.abs() * (e * (e - 1)) as f64)
                .sum::<f64>();
    let poly = Polynomial { terms };
    let map = |a: f64| convention.apply(poly.phi(a));

    let mut a = 0.5;
    let mut trace = vec![a];
    let mut damped = false;
    let mut last_residual = f64::INFINITY;
    let mut iterations = 0;
    let mut residual = (map(a) - a).abs();
    while residual >= tol && iterations < max_iter {
        let next = map(a);
        a = if damped { 0.5 * (a + next) } else { next };
        iterations += 1;
        trace.push(a);
        residual = (map(a) - a).abs();
        // an undamped step that fails to shrink the residual signals oscillation
        if !damped && residual >= last_residual {
            damped = true;
        }
        last_residual = residual;
    }
    Ok(ErApproximation {
        a_star: a,
        converged: residual < tol,
        iterations,
        assumption1_margin: margin,
        convention,
        residual,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{StatKind, StatisticSpec};

    #[test]
    fn edges_only_sigmoid_is_exact() {
        let m = ErgmModel::edges_only(20, -2.0).unwrap();
        let r = solve_a_star(&m, PhiConvention::Sigmoid, 1e-12, 1000).unwrap();
        assert!(r.converged);
        assert!((r.a_star - logistic(-2.0)).abs() < 1e-12);
        assert_eq!(r.assumption1_margin, 1.0);
    }

    #[test]
    fn zero_coefficients_give_one_half() {
        let m = ErgmModel::e2st(20, [0.0, 0.0, 0.0]).unwrap();
        for c in [PhiConvention::TanhHalf, PhiConvention::Sigmoid] {
            let r = solve_a_star(&m, c, 1e-12, 1000).unwrap();
            assert_eq!(r.a_star, 0.5);
            assert_eq!(r.iterations, 0);
        }
    }

    #[test]
    fn e2st_null_under_both_conventions() {
        let m = ErgmModel::e2st(20, [-2.0, 0.0, 0.01]).unwrap();
        let tanh = solve_a_star(&m, PhiConvention::TanhHalf, 1e-12, 1000).unwrap();
        let sig = solve_a_star(&m, PhiConvention::Sigmoid, 1e-12, 1000).unwrap();
        assert!(tanh.converged && sig.converged);
        assert!((tanh.a_star - 0.0180).abs() < 1e-4, "{}", tanh.a_star);
        assert!((sig.a_star - 0.1192).abs() < 1e-4, "{}", sig.a_star);
        assert!((tanh.assumption1_margin - 0.97).abs() < 1e-12);
    }

    #[test]
    fn margin_goes_negative_for_strong_two_stars() {
        let m = ErgmModel::e2st(20, [-2.0, 2.0, 0.0]).unwrap();
        let r = solve_a_star(&m, PhiConvention::Sigmoid, 1e-12, 1000).unwrap();
        assert!(r.assumption1_margin < 0.0);
    }

    #[test]
    fn non_subgraph_statistics_are_rejected() {
        let m = ErgmModel::new(
            10,
            vec![-1.0, 0.1],
            vec![StatisticSpec::raw(StatKind::Edges), StatisticSpec::raw(StatKind::AltKStar(0.5))],
        )
        .unwrap();
        assert!(matches!(
            solve_a_star(&m, PhiConvention::Sigmoid, 1e-10, 100),
            Err(Error::UnsupportedStatistic(_))
        ));
    }
}
