//! Space-time quadrature of the Duhamel representation of `u_1`, independent
//! of the operator algebra.

use nalgebra::DVector;

use super::plan::ExpansionPlan;
use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::gaussian::{
    gaussian_expectation, kernel_from_a0, legendre_rule, visit_gaussian_nodes, GaussianKernel, Quadrature,
};
use crate::payoff::Payoff;

/// Node counts for [`duhamel_u1`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuhamelQuadrature {
    /// Gauss–Legendre nodes in `s`.
    pub time_order: usize,
    /// Gauss–Hermite nodes per axis in `ξ`.
    pub space_order: usize,
    /// Quadrature in `y` against the payoff; the plan's default when `None`.
    pub payoff: Option<Quadrature>,
}

impl Default for DuhamelQuadrature {
    fn default() -> Self {
        DuhamelQuadrature {
            time_order: 32,
            space_order: 48,
            payoff: None,
        }
    }
}

const KERNEL_TIME_ORDER: usize = 16;

/// `u_1(t,x) = ∫_t^T e^{∫_t^s γ} ∫ Γ_0(t,x;s,ξ) A_1^ξ(s) u_0(s,ξ) dξ ds`.
///
/// Derivatives of `u_0` up to order two use the closed forms
/// `∂_{ξ_i} Γ_0 = (C^{-1}w)_i Γ_0` and
/// `∂_{ξ_i ξ_j} Γ_0 = ((C^{-1}w)_i (C^{-1}w)_j − C^{-1}_{ij}) Γ_0`, `w = y − ξ − m`.
pub fn duhamel_u1(
    plan: &ExpansionPlan,
    payoff: &Payoff,
    t: f64,
    x: &[f64],
    maturity: f64,
    quadrature: DuhamelQuadrature,
) -> Result<f64> {
    let field = plan.field();
    let d = field.dim();
    if d > 2 {
        return Err(Error::InvalidInput("the Duhamel oracle supports d ≤ 2".into()));
    }
    if !(t < maturity) {
        return Err(Error::InvalidInput(format!("need t < T, got t = {t}, T = {maturity}")));
    }
    let scheme = plan.scheme_at(t, x);
    let a0 = |alpha: &MultiIndex, u: f64| -> f64 {
        scheme
            .centred_expansion(field, 0, u)
            .map(|e| {
                e.terms[0]
                    .get(alpha)
                    .map_or(0.0, |p| p.coefficient(&MultiIndex::zeros(alpha.dim())))
            })
            .unwrap_or(f64::NAN)
    };
    let payoff_quad = quadrature.payoff.unwrap_or_else(|| plan.quadrature_for(payoff));
    let space_quad = Quadrature::GaussHermite {
        order: quadrature.space_order,
    };
    let kinks = payoff.kinks();
    let rule = legendre_rule(quadrature.time_order);
    let (half, mid) = (0.5 * (maturity - t), 0.5 * (maturity + t));
    let mut total = 0.0;
    for &(node, weight) in rule.iter() {
        let s = mid + half * node;
        let outer = kernel_from_a0(d, a0, t, s, KERNEL_TIME_ORDER)?;
        let inner = kernel_from_a0(d, a0, s, maturity, KERNEL_TIME_ORDER)?;
        let exp1 = scheme.centred_expansion(field, 1, s)?;
        let center = exp1.center.clone();
        let first = &exp1.terms[1];
        if first.is_empty() {
            continue;
        }
        let mut err = None;
        let value = gaussian_expectation(&outer.mean(x), outer.cholesky(), space_quad, &[], |_, xi| {
            let z: Vec<f64> = xi.iter().zip(&center).map(|(a, b)| a - b).collect();
            let derivs = match u0_derivatives(&inner, xi, payoff, payoff_quad, &kinks) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return 0.0;
                }
            };
            first
                .iter()
                .map(|(alpha, p)| p.evaluate(&z).expect("dimension checked") * derivs.get(alpha))
                .sum()
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        total += weight * half * outer.killing_factor() * inner.killing_factor() * value;
    }
    Ok(total)
}

/// `D_ξ^α u_0(s,ξ)` for `|α| ≤ 2`, without killing.
struct U0Derivatives {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

impl U0Derivatives {
    fn get(&self, alpha: &MultiIndex) -> f64 {
        let idx: Vec<usize> = (0..alpha.dim())
            .flat_map(|i| std::iter::repeat(i).take(alpha.get(i) as usize))
            .collect();
        match idx.as_slice() {
            [] => self.value,
            [i] => self.grad[*i],
            [i, j] => self.hess[*i][*j],
            _ => unreachable!("coefficients have order at most 2"),
        }
    }
}

fn u0_derivatives(
    kernel: &GaussianKernel,
    xi: &[f64],
    payoff: &Payoff,
    quad: Quadrature,
    kinks: &[f64],
) -> Result<U0Derivatives> {
    let d = xi.len();
    let p = kernel.precision();
    let mean = kernel.mean(xi);
    let mut acc = vec![0.0; 1 + d + d * d];
    visit_gaussian_nodes(&mean, kernel.cholesky(), quad, kinks, |wt, _, y| {
        let phi = payoff.value(y) * wt;
        let w = DVector::from_iterator(d, (0..d).map(|i| y[i] - mean[i]));
        let g = p * &w;
        acc[0] += phi;
        for i in 0..d {
            acc[1 + i] += g[i] * phi;
            for j in 0..d {
                acc[1 + d + i * d + j] += (g[i] * g[j] - p[(i, j)]) * phi;
            }
        }
    })?;
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("non-finite u_0 derivative".into()));
    }
    Ok(U0Derivatives {
        value: acc[0],
        grad: (0..d).map(|i| acc[1 + i]).collect(),
        hess: (0..d).map(|i| (0..d).map(|j| acc[1 + d + i * d + j]).collect()).collect(),
    })
}
