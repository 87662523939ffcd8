//! Random-walk kernels on the direct product graph.
//!
//! With constant vertex labels and unit edge labels the product adjacency is
//! `A ⊗ A'`, so `1ᵀ(A ⊗ A')^t 1 = (1ᵀA^t 1)(1ᵀA'^t 1)`. The geometric kernel
//! is evaluated through the eigendecompositions `A = U M Uᵀ`, `A' = V N Vᵀ`:
//! `1ᵀ(I - λ A ⊗ A')^{-1} 1 = Σ_{i,j} (1ᵀu_i)² (1ᵀv_j)² / (1 - λ μ_i ν_j)`.
//! Dense and conjugate-gradient solves of the product system remain as
//! cross-checks.

use nalgebra::{DMatrix, SymmetricEigen};
#[cfg(test)]
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub(crate) struct WalkGraph {
    #[cfg_attr(not(test), allow(dead_code))]
    pub adjacency: DMatrix<f64>,
    pub spectral_radius: f64,
    /// `(μ_i, (1ᵀu_i)²)` for each eigenpair.
    pub spectrum: Vec<(f64, f64)>,
}

impl WalkGraph {
    pub(crate) fn new(g: &Graph) -> Self {
        let n = g.n();
        let adjacency = DMatrix::from_row_slice(n, n, &g.adjacency_dense());
        let eig = SymmetricEigen::new(adjacency.clone());
        let spectrum: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .map(|(&mu, u)| (mu, u.sum().powi(2)))
            .collect();
        let spectral_radius = spectrum.iter().fold(0.0f64, |m, (mu, _)| m.max(mu.abs()));
        Self { adjacency, spectral_radius, spectrum }
    }
}

/// `1ᵀA^t 1` for `t = 0..=k`.
pub(crate) fn walk_counts(g: &Graph, k: usize) -> Vec<f64> {
    let n = g.n();
    let mut v = vec![1.0; n];
    let mut counts = Vec::with_capacity(k + 1);
    counts.push(n as f64);
    for _ in 0..k {
        let next: Vec<f64> = (0..n).map(|i| g.neighbours(i).map(|j| v[j]).sum()).collect();
        counts.push(next.iter().sum());
        v = next;
    }
    counts
}

/// `Σ entries (I - λ A ⊗ A')^{-1}`.
pub(crate) fn geometric(a: &WalkGraph, b: &WalkGraph, lambda: f64) -> Result<f64> {
    let radius = a.spectral_radius * b.spectral_radius;
    if lambda * radius >= 1.0 {
        return Err(Error::Divergence { lambda, radius });
    }
    let mut total = 0.0;
    for &(mu, pu) in &a.spectrum {
        for &(nu, pv) in &b.spectrum {
            total += pu * pv / (1.0 - lambda * mu * nu);
        }
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) fn geometric_dense(a: &WalkGraph, b: &WalkGraph, lambda: f64) -> Result<f64> {
    let kron = a.adjacency.kronecker(&b.adjacency);
    let size = kron.nrows();
    let system = DMatrix::identity(size, size) - kron * lambda;
    let x = system
        .lu()
        .solve(&DVector::from_element(size, 1.0))
        .ok_or_else(|| Error::LinearSolve("I - λ A⊗A' is singular".into()))?;
    Ok(x.sum())
}

/// Conjugate gradients on `(I - λ A ⊗ A') vec(Z) = 1`, which is symmetric
/// positive definite once `λ ρ(A) ρ(A') < 1`.
#[cfg(test)]
pub(crate) fn geometric_cg(a: &WalkGraph, b: &WalkGraph, lambda: f64) -> Result<f64> {
    let (na, nb) = (a.adjacency.nrows(), b.adjacency.nrows());
    // Z is nb x na, column-major vec(Z) matches the Kronecker ordering a ⊗ b
    let apply = |z: &DMatrix<f64>| -> DMatrix<f64> { z - (&b.adjacency * z * &a.adjacency) * lambda };
    let rhs = DMatrix::from_element(nb, na, 1.0);
    let mut x = DMatrix::zeros(nb, na);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let tol = 1e-26 * rhs.norm_squared();
    for _ in 0..10 * (na * nb).max(100) {
        if rr <= tol {
            return Ok(x.sum());
        }
        let ap = apply(&p);
        let alpha = rr / p.dot(&ap);
        x += &p * alpha;
        r -= &ap * alpha;
        let rr_next = r.norm_squared();
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    Err(Error::LinearSolve("conjugate gradients did not converge".into()))
}
