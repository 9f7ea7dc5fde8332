use std::collections::BTreeMap;

use super::kernel::GaussianKernel;
use super::quadrature::{gaussian_expectation, Quadrature};
use crate::algebra::{MultiIndex, Polynomial, WeylOperator};
use crate::error::{ensure_dim, Error, Result};
use crate::payoff::Payoff;

/// A polynomial times the Gaussian kernel, `q(y) · Γ_0(t,x;T,y)`, at a frozen
/// starting point `x`.
///
/// The polynomial is stored in the centred variable `w = y − x − m(t,T)`;
/// [`PolyGaussian::poly_in_y`] re-expresses it in `y`.
#[derive(Clone, Debug)]
pub struct PolyGaussian {
    poly: Polynomial<f64>,
    kernel: GaussianKernel,
    x: Vec<f64>,
}

impl PolyGaussian {
    /// `q ≡ 1`, i.e. the kernel itself.
    pub fn kernel_only(kernel: GaussianKernel, x: &[f64]) -> Result<Self> {
        kernel.check_point(x)?;
        Ok(PolyGaussian {
            poly: Polynomial::one(kernel.dim()),
            kernel,
            x: x.to_vec(),
        })
    }

    pub fn from_centred(poly: Polynomial<f64>, kernel: GaussianKernel, x: &[f64]) -> Result<Self> {
        kernel.check_point(x)?;
        ensure_dim(kernel.dim(), poly.dim())?;
        Ok(PolyGaussian {
            poly,
            kernel,
            x: x.to_vec(),
        })
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// The polynomial factor in the centred variable `w = y − x − m`.
    pub fn centred_poly(&self) -> &Polynomial<f64> {
        &self.poly
    }

    /// The polynomial factor as a polynomial in `y`.
    pub fn poly_in_y(&self) -> Polynomial<f64> {
        let shift = self.kernel.mean(&self.x);
        self.poly
            .substitute_affine(&shift)
            .expect("dimensions agree by construction")
    }

    /// `q(y) · Γ_0(t,x;T,y)`, without the killing factor.
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        let w = self.kernel.centred(&self.x, y);
        let q = self.poly.evaluate(&w).expect("dimension checked");
        q * self.kernel.log_density_centred(&w).exp()
    }

    pub fn add(&self, other: &PolyGaussian) -> Result<PolyGaussian> {
        self.same_base(other)?;
        Ok(PolyGaussian {
            poly: self.poly.add(&other.poly)?,
            kernel: self.kernel.clone(),
            x: self.x.clone(),
        })
    }

    fn same_base(&self, other: &PolyGaussian) -> Result<()> {
        let same = self.x == other.x
            && self.kernel.mean_offset() == other.kernel.mean_offset()
            && self.kernel.covariance() == other.kernel.covariance();
        if same {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "poly-Gaussians must share kernel and starting point".into(),
            ))
        }
    }

    /// `∂_{y_i}` of the product.
    pub fn d_y(&self, i: usize) -> Result<PolyGaussian> {
        let grad = precision_rows(&self.kernel);
        let poly = self.poly.derivative(i)?.sub(&self.poly.mul(&grad[i])?)?;
        Ok(PolyGaussian {
            poly,
            kernel: self.kernel.clone(),
            x: self.x.clone(),
        })
    }

    /// `∂_{x_i}` of the product; the kernel depends on `y − x` only.
    pub fn d_x(&self, i: usize) -> Result<PolyGaussian> {
        let mut out = self.d_y(i)?;
        out.poly = out.poly.neg();
        Ok(out)
    }

    /// Multiplies by a polynomial in `y`.
    pub fn mul_poly_y(&self, p: &Polynomial<f64>) -> Result<PolyGaussian> {
        ensure_dim(self.kernel.dim(), p.dim())?;
        // y = w + x + m
        let shift: Vec<f64> = self.kernel.mean(&self.x).iter().map(|v| -v).collect();
        let in_w = p.substitute_affine(&shift)?;
        Ok(PolyGaussian {
            poly: self.poly.mul(&in_w)?,
            kernel: self.kernel.clone(),
            x: self.x.clone(),
        })
    }

    /// `∫ q(y) Γ_0(t,x;T,y) f(y) dy` for an arbitrary integrand; `kinks` lie on
    /// the first axis.
    pub fn integrate_fn<F>(&self, quadrature: Quadrature, kinks: &[f64], mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mean = self.kernel.mean(&self.x);
        let d = mean.len();
        let mut w = vec![0.0; d];
        let value = gaussian_expectation(&mean, self.kernel.cholesky(), quadrature, kinks, |_, y| {
            for i in 0..d {
                w[i] = y[i] - mean[i];
            }
            self.poly.evaluate(&w).expect("dimension checked") * f(y)
        })?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Quadrature("non-finite poly-Gaussian integral".into()))
        }
    }

    /// `∫ q(y) Γ_0(t,x;T,y) φ(y) dy`, without the killing factor.
    pub fn integrate_against(&self, payoff: &Payoff, quadrature: Quadrature) -> Result<f64> {
        integrate_against(self, payoff, quadrature)
    }
}

/// `∫ pg(y) φ(y) dy` with nodes mapped through the kernel's Cholesky factor.
pub fn integrate_against(pg: &PolyGaussian, payoff: &Payoff, quadrature: Quadrature) -> Result<f64> {
    pg.integrate_fn(quadrature, &payoff.kinks(), |y| payoff.value(y))
        .map_err(|_| Error::Quadrature(format!("non-finite integral against {payoff:?}")))
}

/// Linear forms `(C^{-1} w)_i` as polynomials in `w`.
fn precision_rows(kernel: &GaussianKernel) -> Vec<Polynomial<f64>> {
    let d = kernel.dim();
    let p = kernel.precision();
    (0..d)
        .map(|i| {
            Polynomial::from_terms(d, (0..d).map(|j| (MultiIndex::unit(d, j), p[(i, j)])))
                .expect("dimension fixed")
        })
        .collect()
}

/// Memoised `R_α` with `D_y^α Γ_0 = R_α(w) Γ_0`, from
/// `R_{α+e_i} = ∂_{w_i} R_α − (C^{-1} w)_i R_α`.
pub(crate) struct KernelDerivatives {
    rows: Vec<Polynomial<f64>>,
    cache: BTreeMap<MultiIndex, Polynomial<f64>>,
}

impl KernelDerivatives {
    pub(crate) fn new(kernel: &GaussianKernel) -> Self {
        let mut cache = BTreeMap::new();
        cache.insert(MultiIndex::zeros(kernel.dim()), Polynomial::one(kernel.dim()));
        KernelDerivatives {
            rows: precision_rows(kernel),
            cache,
        }
    }

    pub(crate) fn y_derivative(&mut self, alpha: &MultiIndex) -> Polynomial<f64> {
        if let Some(p) = self.cache.get(alpha) {
            return p.clone();
        }
        let i = alpha
            .iter()
            .position(|a| a > 0)
            .expect("zero multi-index is cached");
        let lower = alpha
            .checked_sub(&MultiIndex::unit(alpha.dim(), i))
            .expect("positive component");
        let base = self.y_derivative(&lower);
        let next = base
            .derivative(i)
            .and_then(|d| d.sub(&base.mul(&self.rows[i])?))
            .expect("dimensions agree");
        self.cache.insert(alpha.clone(), next.clone());
        next
    }

    /// `D_x^α Γ_0 = (−1)^{|α|} D_y^α Γ_0`.
    pub(crate) fn x_derivative(&mut self, alpha: &MultiIndex) -> Polynomial<f64> {
        let p = self.y_derivative(alpha);
        if alpha.order() % 2 == 1 {
            p.neg()
        } else {
            p
        }
    }
}

/// Applies a time-free operator in `x` to `Γ_0(t,x;T,·)` at the point `x`.
///
/// The operator's coordinate is `x − origin`, so `x^β` terms evaluate to
/// `(x − origin)^β`. Every `∂_x` is turned into a polynomial factor through
/// `∂_{x_i} Γ_0 = (C^{-1}(y − x − m))_i Γ_0`.
pub fn apply_weyl_to_kernel(
    op: &WeylOperator<f64>,
    kernel: &GaussianKernel,
    x: &[f64],
    origin: &[f64],
) -> Result<PolyGaussian> {
    ensure_dim(kernel.dim(), op.dim())?;
    kernel.check_point(x)?;
    ensure_dim(kernel.dim(), origin.len())?;
    if !op.is_time_free() {
        return Err(Error::InvalidInput(
            "operator still carries symbolic time factors".into(),
        ));
    }
    let local: Vec<f64> = x.iter().zip(origin).map(|(a, b)| a - b).collect();
    let mut derivs = KernelDerivatives::new(kernel);
    let mut poly = Polynomial::zero(kernel.dim());
    for (key, c) in op.terms() {
        let weight = c * key.mult.monomial(&local);
        if weight == 0.0 {
            continue;
        }
        let r = derivs.x_derivative(&key.deriv);
        poly = poly.add(&r.scale(&weight))?;
    }
    PolyGaussian::from_centred(poly, kernel.clone(), x)
}

/// Applies a time-free operator acting in the backward variable `y` to
/// `Γ_0(t,x;T,y)`; its coordinate is `y − origin`.
pub fn apply_weyl_in_y(
    op: &WeylOperator<f64>,
    kernel: &GaussianKernel,
    x: &[f64],
    origin: &[f64],
) -> Result<PolyGaussian> {
    ensure_dim(kernel.dim(), op.dim())?;
    kernel.check_point(x)?;
    ensure_dim(kernel.dim(), origin.len())?;
    if !op.is_time_free() {
        return Err(Error::InvalidInput(
            "operator still carries symbolic time factors".into(),
        ));
    }
    let d = kernel.dim();
    // y − origin = w + (x + m − origin)
    let offset: Vec<f64> = kernel
        .mean(x)
        .iter()
        .zip(origin)
        .map(|(a, b)| -(a - b))
        .collect();
    let mut derivs = KernelDerivatives::new(kernel);
    let mut poly = Polynomial::zero(d);
    for (key, c) in op.terms() {
        let mult = Polynomial::monomial(key.mult.clone(), *c).substitute_affine(&offset)?;
        let r = derivs.y_derivative(&key.deriv);
        poly = poly.add(&mult.mul(&r)?)?;
    }
    PolyGaussian::from_centred(poly, kernel.clone(), x)
}
