//! Orthonormal Hermite polynomials under a Gaussian weight.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::quadrature::{visit_gaussian_nodes, Quadrature};
use crate::algebra::{factorial, MultiIndex, Polynomial};
use crate::error::{ensure_dim, Error, Result};

/// Default Gauss–Hermite order per axis for Hermite projections.
pub const DEFAULT_HERMITE_QUADRATURE: usize = 80;

/// Coefficients (ascending powers) of `He_n(x) / √(n!)`, orthonormal for the
/// standard normal weight.
pub fn hermite_coefficients(n: u32) -> Vec<f64> {
    // He_{k+1} = x He_k − k He_{k−1}
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    let norm = factorial(n).sqrt();
    cur.iter().map(|c| c / norm).collect()
}

pub fn hermite_value(n: u32, x: f64) -> f64 {
    hermite_coefficients(n).iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `H_β(w) = ∏_i H_{β_i}(w_i)` as a polynomial in `w`.
pub fn hermite_polynomial(beta: &MultiIndex) -> Polynomial<f64> {
    let d = beta.dim();
    let mut out = Polynomial::one(d);
    for (i, b) in beta.iter().enumerate() {
        let coeffs = hermite_coefficients(b);
        let factor = Polynomial::from_terms(
            d,
            coeffs.iter().enumerate().map(|(k, c)| {
                let mut e = MultiIndex::zeros(d);
                for _ in 0..k {
                    e = e.incremented(i);
                }
                (e, *c)
            }),
        )
        .expect("dimension fixed");
        out = out.mul(&factor).expect("dimension fixed");
    }
    out
}

/// Whitening map `w = L^{-1}(x − center)` for a weight covariance `LLᵀ`.
pub(crate) fn whitening(weight_covariance: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let chol = weight_covariance
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ModelRejected("Hermite weight covariance is not SPD".into()))?;
    let l = chol.l();
    let inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::ModelRejected("singular Hermite weight".into()))?;
    Ok((l, inv))
}

/// `c_β = ⟨H_β(·−x̄), f⟩_Γ` for `|β| ≤ max_order`, where the inner product is
/// taken against `N(x̄, Σ)` and `H_β` is evaluated in whitened coordinates
/// `L^{-1}(· − x̄)` (plain `H_β(· − x̄)` when `Σ = I`).
pub fn hermite_inner_products<F>(
    f: F,
    center: &[f64],
    weight_covariance: &DMatrix<f64>,
    max_order: u32,
) -> Result<BTreeMap<MultiIndex, f64>>
where
    F: Fn(&[f64]) -> f64,
{
    hermite_inner_products_with(f, center, weight_covariance, max_order, DEFAULT_HERMITE_QUADRATURE)
}

pub fn hermite_inner_products_with<F>(
    f: F,
    center: &[f64],
    weight_covariance: &DMatrix<f64>,
    max_order: u32,
    quadrature_order: usize,
) -> Result<BTreeMap<MultiIndex, f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let d = center.len();
    ensure_dim(d, weight_covariance.nrows())?;
    let (l, _) = whitening(weight_covariance)?;
    let betas = MultiIndex::all_up_to(d, max_order);
    let tables: Vec<Vec<f64>> = (0..=max_order).map(hermite_coefficients).collect();
    let mut sums = vec![0.0; betas.len()];
    let q = Quadrature::GaussHermite {
        order: quadrature_order,
    };
    let mut h_vals = vec![vec![0.0; max_order as usize + 1]; d];
    visit_gaussian_nodes(center, &l, q, &[], |w, z, x| {
        let fx = f(x);
        for i in 0..d {
            for (n, coeffs) in tables.iter().enumerate() {
                h_vals[i][n] = coeffs.iter().rev().fold(0.0, |acc, c| acc * z[i] + c);
            }
        }
        for (k, beta) in betas.iter().enumerate() {
            let h: f64 = beta
                .iter()
                .enumerate()
                .map(|(i, b)| h_vals[i][b as usize])
                .product();
            sums[k] += w * h * fx;
        }
    })?;
    if sums.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("non-finite Hermite projection".into()));
    }
    Ok(betas.into_iter().zip(sums).collect())
}
