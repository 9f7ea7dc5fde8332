//! Model coefficients `a_α(t,x)`, `|α| ≤ 2`, with their spatial derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{binomial, MultiIndex};
use crate::error::{ensure_dim, Error, Result};

/// User-supplied coefficients of `A = Σ_{|α|≤2} a_α(t,x) D^α`.
///
/// Implementations must be pure and reentrant: the engine and the oracles
/// call them from several threads at once.
pub trait CoefficientModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Multi-indices with a coefficient that is not identically zero.
    fn terms(&self) -> Vec<MultiIndex>;

    fn coefficient(&self, alpha: &MultiIndex, t: f64, x: &[f64]) -> f64;

    /// `D^β a_α(t,x)` when available in closed form.
    fn derivative(&self, _alpha: &MultiIndex, _beta: &MultiIndex, _t: f64, _x: &[f64]) -> Option<f64> {
        None
    }

    fn is_time_homogeneous(&self) -> bool {
        true
    }
}

/// Default number of points in the ellipticity sample cloud.
pub const DEFAULT_ELLIPTICITY_SAMPLES: usize = 128;

/// A registered model: coefficients, the derivative order it supports and the
/// ellipticity constant `M` of `M^{-1}|ξ|² ≤ Σ a_{ij} ξ_i ξ_j ≤ M|ξ|²`.
#[derive(Clone)]
pub struct CoefficientField {
    model: Arc<dyn CoefficientModel>,
    terms: Vec<MultiIndex>,
    derivative_order: u32,
    ellipticity: f64,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("dim", &self.dim())
            .field("terms", &self.terms)
            .field("derivative_order", &self.derivative_order)
            .field("ellipticity", &self.ellipticity)
            .finish()
    }
}

impl CoefficientField {
    pub fn new<M: CoefficientModel + 'static>(model: M, derivative_order: u32, ellipticity: f64) -> Result<Self> {
        Self::from_arc(Arc::new(model), derivative_order, ellipticity)
    }

    pub fn from_arc(model: Arc<dyn CoefficientModel>, derivative_order: u32, ellipticity: f64) -> Result<Self> {
        if !(ellipticity >= 1.0) || !ellipticity.is_finite() {
            return Err(Error::InvalidInput(format!(
                "ellipticity constant must be finite and at least 1, got {ellipticity}"
            )));
        }
        let d = model.dim();
        if d == 0 {
            return Err(Error::InvalidInput("model dimension must be positive".into()));
        }
        let mut terms = model.terms();
        for alpha in &terms {
            ensure_dim(d, alpha.dim())?;
            if alpha.order() > 2 {
                return Err(Error::InvalidInput(format!(
                    "coefficient {alpha} has order above 2"
                )));
            }
        }
        terms.sort();
        terms.dedup();
        Ok(CoefficientField {
            model,
            terms,
            derivative_order,
            ellipticity,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn terms(&self) -> &[MultiIndex] {
        &self.terms
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivative_order
    }

    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    pub fn is_time_homogeneous(&self) -> bool {
        self.model.is_time_homogeneous()
    }

    pub fn model(&self) -> &Arc<dyn CoefficientModel> {
        &self.model
    }

    pub fn value(&self, alpha: &MultiIndex, t: f64, x: &[f64]) -> f64 {
        if self.terms.contains(alpha) {
            self.model.coefficient(alpha, t, x)
        } else {
            0.0
        }
    }

    pub(crate) fn require_order(&self, order: u32) -> Result<()> {
        if order > self.derivative_order {
            Err(Error::InsufficientDerivativeOrder {
                requested: order as usize,
                available: self.derivative_order as usize,
            })
        } else {
            Ok(())
        }
    }

    /// `D^β a_α(t,x)`, analytic when the model provides it and by central
    /// finite differences otherwise.
    pub fn derivative(&self, alpha: &MultiIndex, beta: &MultiIndex, t: f64, x: &[f64]) -> Result<f64> {
        ensure_dim(self.dim(), x.len())?;
        ensure_dim(self.dim(), beta.dim())?;
        self.require_order(beta.order())?;
        if !self.terms.contains(alpha) {
            return Ok(0.0);
        }
        if beta.is_zero() {
            return Ok(self.model.coefficient(alpha, t, x));
        }
        if let Some(v) = self.model.derivative(alpha, beta, t, x) {
            return Ok(v);
        }
        Ok(central_difference(|p| self.model.coefficient(alpha, t, p), x, beta))
    }

    /// Symmetric matrix `S` of the second-order symbol `⟨Sξ, ξ⟩ = Σ_{|α|=2} a_α ξ^α`.
    pub fn symbol_matrix(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let mut s = DMatrix::zeros(d, d);
        for alpha in self.terms.iter().filter(|a| a.order() == 2) {
            let v = self.model.coefficient(alpha, t, x);
            let idx: Vec<usize> = (0..d).flat_map(|i| std::iter::repeat(i).take(alpha.get(i) as usize)).collect();
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                s[(i, i)] += v;
            } else {
                s[(i, j)] += 0.5 * v;
                s[(j, i)] += 0.5 * v;
            }
        }
        s
    }

    /// Diffusion covariance rate `C(t,x) = 2S`, i.e. `C_ii = 2a_{2e_i}` and
    /// `C_ij = a_{e_i+e_j}`.
    pub fn covariance_rate(&self, t: f64, x: &[f64]) -> DMatrix<f64> {
        self.symbol_matrix(t, x) * 2.0
    }

    /// Checks `M^{-1} ≤ eig(S) ≤ M` on a reproducible uniform sample of the box
    /// `[lo, hi]` at each of the given times.
    pub fn check_ellipticity(&self, lo: &[f64], hi: &[f64], times: &[f64], samples: usize) -> Result<()> {
        let d = self.dim();
        ensure_dim(d, lo.len())?;
        ensure_dim(d, hi.len())?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x = vec![0.0; d];
        for &t in times {
            for _ in 0..samples.max(1) {
                for i in 0..d {
                    x[i] = if hi[i] > lo[i] { rng.random_range(lo[i]..hi[i]) } else { lo[i] };
                }
                let eig = SymmetricEigen::new(self.symbol_matrix(t, &x)).eigenvalues;
                let (lo_e, hi_e) = (eig.min(), eig.max());
                if !(lo_e >= 1.0 / self.ellipticity) || !(hi_e <= self.ellipticity) {
                    return Err(Error::ModelRejected(format!(
                        "ellipticity fails at t = {t}, x = {x:?}: symbol eigenvalues in [{lo_e:e}, {hi_e:e}], M = {}",
                        self.ellipticity
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Tensor central difference for `D^β f(x)` with step `ε^{1/(|β|+2)}·max(1, |x|_∞)`.
pub(crate) fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], beta: &MultiIndex) -> f64 {
    let k = beta.order();
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let h = f64::EPSILON.powf(1.0 / (k as f64 + 2.0)) * scale;
    let d = x.len();
    // stencil per axis: weights (−1)^j C(k_i, j) at offsets (k_i/2 − j) h
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|i| {
            let ki = beta.get(i);
            (0..=ki)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    (sign * binomial(ki, j) as f64, (ki as f64 / 2.0 - j as f64) * h)
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut p = x.to_vec();
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for i in 0..d {
            let (wi, off) = axes[i][idx[i]];
            w *= wi;
            p[i] = x[i] + off;
        }
        total += w * f(&p);
        let mut i = 0;
        loop {
            if i == d {
                return total / h.powi(k as i32);
            }
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

type CoefficientFn = dyn Fn(&MultiIndex, f64, &[f64]) -> f64 + Send + Sync;

/// A model given by a single callback; derivatives come from finite differences.
pub struct FnModel {
    dim: usize,
    terms: Vec<MultiIndex>,
    f: Arc<CoefficientFn>,
    time_homogeneous: bool,
}

impl FnModel {
    pub fn new<F>(dim: usize, terms: Vec<MultiIndex>, f: F, time_homogeneous: bool) -> Self
    where
        F: Fn(&MultiIndex, f64, &[f64]) -> f64 + Send + Sync + 'static,
    {
        FnModel {
            dim,
            terms,
            f: Arc::new(f),
            time_homogeneous,
        }
    }
}

impl CoefficientModel for FnModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn terms(&self) -> Vec<MultiIndex> {
        self.terms.clone()
    }

    fn coefficient(&self, alpha: &MultiIndex, t: f64, x: &[f64]) -> f64 {
        (self.f)(alpha, t, x)
    }

    fn is_time_homogeneous(&self) -> bool {
        self.time_homogeneous
    }
}

/// Time-homogeneous coefficients that are polynomials in `x`; derivatives are exact.
#[derive(Clone, Debug)]
pub struct PolynomialModel {
    dim: usize,
    coefficients: Vec<(MultiIndex, crate::algebra::Polynomial<f64>)>,
}

impl PolynomialModel {
    pub fn new(dim: usize, coefficients: Vec<(MultiIndex, crate::algebra::Polynomial<f64>)>) -> Result<Self> {
        for (alpha, p) in &coefficients {
            ensure_dim(dim, alpha.dim())?;
            ensure_dim(dim, p.dim())?;
        }
        Ok(PolynomialModel { dim, coefficients })
    }

    fn poly(&self, alpha: &MultiIndex) -> Option<&crate::algebra::Polynomial<f64>> {
        self.coefficients.iter().find(|(a, _)| a == alpha).map(|(_, p)| p)
    }
}

impl CoefficientModel for PolynomialModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn terms(&self) -> Vec<MultiIndex> {
        self.coefficients.iter().map(|(a, _)| a.clone()).collect()
    }

    fn coefficient(&self, alpha: &MultiIndex, _t: f64, x: &[f64]) -> f64 {
        self.poly(alpha)
            .map(|p| p.evaluate(x).expect("dimension checked"))
            .unwrap_or(0.0)
    }

    fn derivative(&self, alpha: &MultiIndex, beta: &MultiIndex, _t: f64, x: &[f64]) -> Option<f64> {
        Some(match self.poly(alpha) {
            Some(p) => p.derivative_multi(beta).ok()?.evaluate(x).ok()?,
            None => 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Polynomial;

    #[test]
    fn finite_differences_of_tanh() {
        let f = |x: &[f64]| 0.2 + 0.1 * x[0].tanh();
        let d1 = central_difference(f, &[0.0], &MultiIndex::from([1]));
        assert!((d1 - 0.1).abs() < 1e-8);
        let d2 = central_difference(f, &[0.5], &MultiIndex::from([2]));
        let t = 0.5f64.tanh();
        assert!((d2 - 0.1 * (-2.0 * t * (1.0 - t * t))).abs() < 1e-5);
    }

    #[test]
    fn mixed_finite_difference() {
        let f = |x: &[f64]| (x[0] * x[1]).sin();
        let v = central_difference(f, &[0.3, 0.4], &MultiIndex::from([1, 1]));
        let p = 0.12f64;
        assert!((v - (p.cos() - p * p.sin())).abs() < 1e-6);
    }

    #[test]
    fn ellipticity_and_orders() {
        let a2 = Polynomial::constant(1, 0.5);
        let model = PolynomialModel::new(1, vec![(MultiIndex::from([2]), a2)]).unwrap();
        let field = CoefficientField::new(model, 4, 2.0).unwrap();
        field.check_ellipticity(&[-1.0], &[1.0], &[0.0], 16).unwrap();
        assert!(matches!(
            field.derivative(&MultiIndex::from([2]), &MultiIndex::from([5]), 0.0, &[0.0]),
            Err(Error::InsufficientDerivativeOrder { requested: 5, available: 4 })
        ));
        let degenerate = PolynomialModel::new(1, vec![(MultiIndex::from([2]), Polynomial::variable(1, 0))]).unwrap();
        let field = CoefficientField::new(degenerate, 4, 2.0).unwrap();
        assert!(field.check_ellipticity(&[-1.0], &[1.0], &[0.0], 64).is_err());
    }

    #[test]
    fn covariance_rate_of_cross_term() {
        let model = PolynomialModel::new(
            2,
            vec![
                (MultiIndex::from([2, 0]), Polynomial::constant(2, 0.5)),
                (MultiIndex::from([0, 2]), Polynomial::constant(2, 0.5)),
                (MultiIndex::from([1, 1]), Polynomial::constant(2, 0.3)),
            ],
        )
        .unwrap();
        let field = CoefficientField::new(model, 2, 4.0).unwrap();
        let c = field.covariance_rate(0.0, &[0.0, 0.0]);
        assert_eq!(c[(0, 0)], 1.0);
        assert_eq!(c[(0, 1)], 0.3);
    }
}
