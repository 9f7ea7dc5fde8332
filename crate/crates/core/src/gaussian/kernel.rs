use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::quadrature::legendre_rule;
use crate::algebra::MultiIndex;
use crate::error::{ensure_dim, Error, Result};

/// Relative tolerance for symmetry and positive definiteness of covariances.
pub const SPD_TOLERANCE: f64 = 1e-12;

/// Leading-order Gaussian transition kernel `Γ_0(t,x;T,y)` with mean
/// `x + m(t,T)` and covariance `C(t,T)`, plus the killing exponent `∫_t^T γ`.
///
/// `density` excludes the killing factor; it integrates to one in `y`.
#[derive(Clone, Debug)]
pub struct GaussianKernel {
    t: f64,
    maturity: f64,
    mean_offset: Vec<f64>,
    covariance: DMatrix<f64>,
    log_killing: f64,
    chol: DMatrix<f64>,
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianKernel {
    pub fn new(
        t: f64,
        maturity: f64,
        mean_offset: Vec<f64>,
        covariance: DMatrix<f64>,
        log_killing: f64,
    ) -> Result<Self> {
        let d = mean_offset.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: covariance.nrows(),
            });
        }
        if !(maturity > t) {
            return Err(Error::InvalidInput(format!(
                "kernel needs t < T, got t = {t}, T = {maturity}"
            )));
        }
        let scale = covariance.amax();
        let asym = (&covariance - covariance.transpose()).amax();
        if !(scale > 0.0) || asym > SPD_TOLERANCE * scale || !scale.is_finite() {
            return Err(Error::ModelRejected(format!(
                "covariance is not a symmetric positive matrix: {covariance}"
            )));
        }
        let eig = SymmetricEigen::new(covariance.clone());
        let min_eig = eig.eigenvalues.min();
        let max_eig = eig.eigenvalues.max();
        if !(min_eig > SPD_TOLERANCE * max_eig) {
            return Err(Error::ModelRejected(format!(
                "covariance is not positive definite (eigenvalues in [{min_eig:e}, {max_eig:e}])"
            )));
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::ModelRejected("Cholesky factorisation failed".into()))?;
        let l = chol.l();
        let precision = chol.inverse();
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(GaussianKernel {
            t,
            maturity,
            mean_offset,
            covariance,
            log_killing,
            chol: l,
            precision,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean_offset.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn mean_offset(&self) -> &[f64] {
        &self.mean_offset
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn log_killing(&self) -> f64 {
        self.log_killing
    }

    /// `exp(∫_t^T γ)`
    pub fn killing_factor(&self) -> f64 {
        self.log_killing.exp()
    }

    /// Lower Cholesky factor of the covariance.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `C(t,T)^{-1}`
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Mean `x + m(t,T)` of the kernel started at `x`.
    pub fn mean(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean_offset).map(|(a, b)| a + b).collect()
    }

    /// Centred variable `w = y − x − m(t,T)`.
    pub fn centred(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| y[i] - x[i] - self.mean_offset[i])
            .collect()
    }

    /// Log-density as a function of the centred variable.
    pub fn log_density_centred(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        let z = self
            .chol
            .solve_lower_triangular(&w)
            .expect("Cholesky factor is invertible");
        self.log_norm - 0.5 * z.norm_squared()
    }

    /// `Γ_0(t,x;T,y)` without the killing factor.
    pub fn density(&self, x: &[f64], y: &[f64]) -> f64 {
        self.log_density_centred(&self.centred(x, y)).exp()
    }

    pub(crate) fn check_point(&self, p: &[f64]) -> Result<()> {
        ensure_dim(self.dim(), p.len())
    }
}

/// Builds `Γ_0` from the order-zero coefficients `a_{α,0}(s)`, `|α| ≤ 2`.
///
/// `C_ii = 2 a_{2e_i,0}`, `C_ij = a_{e_i+e_j,0}`, `m_i = a_{e_i,0}` and
/// `γ = a_{0,0}` are integrated over `[t, T]` with Gauss–Legendre of the given
/// order, which is exact for coefficients polynomial in time of degree below
/// `2 · quadrature_order`.
pub fn kernel_from_a0<F>(
    dim: usize,
    a0: F,
    t: f64,
    maturity: f64,
    quadrature_order: usize,
) -> Result<GaussianKernel>
where
    F: Fn(&MultiIndex, f64) -> f64,
{
    if !(maturity > t) {
        return Err(Error::InvalidInput(format!(
            "kernel needs t < T, got t = {t}, T = {maturity}"
        )));
    }
    let rule = legendre_rule(quadrature_order.max(1));
    let half = 0.5 * (maturity - t);
    let mid = 0.5 * (maturity + t);
    let mut cov = DMatrix::zeros(dim, dim);
    let mut mean = vec![0.0; dim];
    let mut killing = 0.0;
    for &(node, weight) in rule.iter() {
        let s = mid + half * node;
        let w = weight * half;
        for i in 0..dim {
            let ei = MultiIndex::unit(dim, i);
            mean[i] += w * a0(&ei, s);
            cov[(i, i)] += w * 2.0 * a0(&ei.add(&ei), s);
            for j in 0..i {
                let v = w * a0(&ei.add(&MultiIndex::unit(dim, j)), s);
                cov[(i, j)] += v;
                cov[(j, i)] += v;
            }
        }
        killing += w * a0(&MultiIndex::zeros(dim), s);
    }
    GaussianKernel::new(t, maturity, mean, cov, killing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_1d() -> GaussianKernel {
        GaussianKernel::new(0.0, 1.0, vec![0.0], DMatrix::from_element(1, 1, 1.0), 0.0).unwrap()
    }

    #[test]
    fn standard_normal_mode() {
        assert_abs_diff_eq!(unit_1d().density(&[0.3], &[0.3]), 0.3989422804014327, epsilon = 1e-15);
        let k2 = GaussianKernel::new(0.0, 1.0, vec![0.0, 0.0], DMatrix::identity(2, 2), 0.0).unwrap();
        assert_abs_diff_eq!(
            k2.density(&[1.0, 2.0], &[1.0, 2.0]),
            1.0 / (2.0 * std::f64::consts::PI),
            epsilon = 1e-15
        );
    }

    #[test]
    fn shift_equivariance_and_swap_symmetry() {
        let cov = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.3]);
        let k = GaussianKernel::new(0.0, 1.0, vec![0.2, -0.1], cov.clone(), 0.0).unwrap();
        let flipped = GaussianKernel::new(0.0, 1.0, vec![-0.2, 0.1], cov, 0.0).unwrap();
        let (x, y, h) = ([0.1, 0.4], [0.7, -0.2], [1.3, -0.6]);
        let xh = [x[0] + h[0], x[1] + h[1]];
        let yh = [y[0] + h[0], y[1] + h[1]];
        assert_abs_diff_eq!(k.density(&xh, &yh), k.density(&x, &y), epsilon = 1e-14);
        assert_abs_diff_eq!(flipped.density(&y, &x), k.density(&x, &y), epsilon = 1e-14);
    }

    #[test]
    fn kernel_from_constant_coefficients() {
        let k = kernel_from_a0(
            1,
            |a, _| if a.order() == 2 { 0.5 } else { 0.0 },
            0.0,
            1.0,
            4,
        )
        .unwrap();
        assert_abs_diff_eq!(k.covariance()[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.mean_offset()[0], 0.0);
        assert_abs_diff_eq!(k.log_killing(), 0.0);
    }

    #[test]
    fn kernel_cross_covariance_and_linear_killing() {
        let k = kernel_from_a0(
            2,
            |a, s| match a.as_slice() {
                [2, 0] => 0.5,
                [0, 2] => 0.25,
                [1, 1] => 0.2,
                [0, 0] => s,
                _ => 0.0,
            },
            0.0,
            1.0,
            4,
        )
        .unwrap();
        assert_abs_diff_eq!(k.covariance()[(0, 1)], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(k.covariance()[(1, 1)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.log_killing(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn non_spd_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianKernel::new(0.0, 1.0, vec![0.0, 0.0], bad, 0.0),
            Err(Error::ModelRejected(_))
        ));
        let neg = kernel_from_a0(1, |a, _| if a.order() == 2 { -0.5 } else { 0.0 }, 0.0, 1.0, 2);
        assert!(matches!(neg, Err(Error::ModelRejected(_))));
    }
}
