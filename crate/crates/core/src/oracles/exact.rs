use nalgebra::DMatrix;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::algebra::MultiIndex;
use crate::basis::CoefficientField;
use crate::error::{ensure_dim, Error, Result};
use crate::payoff::Payoff;

/// Constant rates `m`, `C` and `γ` of `A = ½Σ C_ij ∂_ij + Σ m_i ∂_i + γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantCoefficients {
    pub drift: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub killing: f64,
}

impl ConstantCoefficients {
    /// The coefficients of `field` frozen at `(t, x)`.
    pub fn frozen(field: &CoefficientField, t: f64, x: &[f64]) -> Result<Self> {
        let d = field.dim();
        ensure_dim(d, x.len())?;
        let drift = (0..d).map(|i| field.value(&MultiIndex::unit(d, i), t, x)).collect();
        Ok(ConstantCoefficients {
            drift,
            covariance: field.covariance_rate(t, x),
            killing: field.value(&MultiIndex::zeros(d), t, x),
        })
    }
}

/// `u(t,x)` in closed form for constant coefficients and a catalog payoff.
///
/// Catalog payoffs depend on the first coordinate only, so just its marginal
/// `N(x_1 + m_1(T−t), C_11(T−t))` enters.
pub fn exact_constant_solution(
    coefficients: &ConstantCoefficients,
    payoff: &Payoff,
    t: f64,
    x: &[f64],
    maturity: f64,
) -> Result<f64> {
    ensure_dim(coefficients.drift.len(), x.len())?;
    let v = maturity - t;
    if !(v > 0.0) {
        return Err(Error::InvalidInput(format!("need t < T, got t = {t}, T = {maturity}")));
    }
    let mu = x[0] + coefficients.drift[0] * v;
    let var = coefficients.covariance[(0, 0)] * v;
    if !(var > 0.0) {
        return Err(Error::ModelRejected("non-positive variance along the first axis".into()));
    }
    let s = var.sqrt();
    let n = Normal::standard();
    let discount = (coefficients.killing * v).exp();
    let call = |strike: f64, log_price: bool| -> f64 {
        if log_price {
            let k = strike.ln();
            let d2 = (mu - k) / s;
            (mu + 0.5 * var).exp() * n.cdf(d2 + s) - strike * n.cdf(d2)
        } else {
            let d = (mu - strike) / s;
            (mu - strike) * n.cdf(d) + s * n.pdf(d)
        }
    };
    let forward = |log_price: bool| if log_price { (mu + 0.5 * var).exp() } else { mu };
    let value = match payoff {
        Payoff::Constant(c) => *c,
        Payoff::Linear => mu,
        Payoff::Call { strike, log_price } => call(*strike, *log_price),
        Payoff::Put { strike, log_price } => call(*strike, *log_price) - forward(*log_price) + strike,
        Payoff::Digital { strike, log_price } => {
            let k = if *log_price { strike.ln() } else { *strike };
            n.cdf((mu - k) / s)
        }
        Payoff::GaussianBump { center, width } => {
            let w2 = width * width;
            (w2 / (w2 + var)).sqrt() * (-(mu - center).powi(2) / (2.0 * (w2 + var))).exp()
        }
        Payoff::Custom { .. } => {
            return Err(Error::InvalidInput("custom payoffs have no closed form".into()));
        }
    };
    Ok(discount * value)
}

/// `Γ^{M+ε}(t,x;T,y)`: the fundamental solution of `(M+ε)Σ∂²_i + ∂_t`, an
/// isotropic Gaussian with variance `2(M+ε)(T−t)` per axis.
pub fn heat_kernel_bound(m_plus_eps: f64, t: f64, x: &[f64], maturity: f64, y: &[f64]) -> Result<f64> {
    ensure_dim(x.len(), y.len())?;
    if !(m_plus_eps > 0.0) || !(maturity > t) {
        return Err(Error::InvalidInput(format!(
            "need M+ε > 0 and t < T, got M+ε = {m_plus_eps}, t = {t}, T = {maturity}"
        )));
    }
    let var = 2.0 * m_plus_eps * (maturity - t);
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let d = x.len() as f64;
    Ok((2.0 * std::f64::consts::PI * var).powf(-0.5 * d) * (-r2 / (2.0 * var)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(var: f64) -> ConstantCoefficients {
        ConstantCoefficients {
            drift: vec![0.0],
            covariance: DMatrix::from_element(1, 1, var),
            killing: 0.0,
        }
    }

    #[test]
    fn half_normal_call_and_atm_digital() {
        let c = unit(1.0);
        let call = Payoff::Call { strike: 0.3, log_price: false };
        let v = exact_constant_solution(&c, &call, 0.0, &[0.3], 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        let dig = Payoff::Digital { strike: 1.0, log_price: true };
        assert_abs_diff_eq!(exact_constant_solution(&c, &dig, 0.0, &[0.0], 1.0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn put_call_parity_and_discount() {
        let mut c = unit(0.04);
        c.drift[0] = 0.01;
        c.killing = -0.02;
        let call = Payoff::Call { strike: 1.1, log_price: true };
        let put = Payoff::Put { strike: 1.1, log_price: true };
        let cv = exact_constant_solution(&c, &call, 0.0, &[0.05], 2.0).unwrap();
        let pv = exact_constant_solution(&c, &put, 0.0, &[0.05], 2.0).unwrap();
        let fwd = (0.05f64 + 0.02 + 0.04).exp();
        assert_abs_diff_eq!(cv - pv, (-0.04f64).exp() * (fwd - 1.1), epsilon = 1e-14);
    }

    #[test]
    fn heat_bound_scaling_and_mass() {
        let v = heat_kernel_bound(0.5, 0.0, &[0.0], 1.0, &[0.0]).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        let a = heat_kernel_bound(0.7, 0.0, &[0.1, 0.2], 4.0, &[0.9, -0.4]).unwrap();
        let b = heat_kernel_bound(0.7, 0.0, &[0.05, 0.1], 1.0, &[0.45, -0.2]).unwrap();
        assert_abs_diff_eq!(a, b / 4.0, epsilon = 1e-15);
        let mass = crate::gaussian::integrate_interval(200, -30.0, 30.0, |y| {
            heat_kernel_bound(1.3, 0.0, &[0.4], 2.0, &[y]).unwrap()
        });
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
    }
}
