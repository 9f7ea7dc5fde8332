use nalgebra::DMatrix;

use super::exact::ConstantCoefficients;
use super::fd::{fd_solve, GridSpec};
use crate::basis::CoefficientField;
use crate::error::{ensure_dim, Error, Result};
use crate::gaussian::GaussianKernel;
use crate::payoff::Payoff;

/// `Γ(t,x;T,y)` at each `x` for one `y`, by finite differences.
///
/// The Dirac datum is replaced by an isotropic Gaussian of width
/// `width_cells` coarse cells, then of half that width. Each mollified value
/// is corrected by the mollification bias of the frozen-coefficient kernel at
/// `x`, and the two are extrapolated in `w²`.
pub fn fd_density(
    field: &CoefficientField,
    t: f64,
    xs: &[Vec<f64>],
    maturity: f64,
    y: &[f64],
    spec: &GridSpec,
    width_cells: f64,
) -> Result<Vec<f64>> {
    let d = field.dim();
    ensure_dim(d, y.len())?;
    for x in xs {
        ensure_dim(d, x.len())?;
    }
    if !(width_cells > 0.0) {
        return Err(Error::InvalidInput("mollifier width must be positive".into()));
    }
    let h = (0..d)
        .map(|i| (spec.hi[i] - spec.lo[i]) / (spec.points - 1) as f64)
        .fold(0.0, f64::max);
    let widths = [width_cells * h, 0.5 * width_cells * h];
    let mut estimates = Vec::with_capacity(2);
    for w in widths {
        let sol = fd_solve(field, &mollifier(y, w), t, maturity, spec)?;
        let corrected = xs
            .iter()
            .map(|x| {
                let frozen = ConstantCoefficients::frozen(field, t, x)?;
                let smoothed = frozen_density(&frozen, t, x, maturity, y, w)?;
                let sharp = frozen_density(&frozen, t, x, maturity, y, 0.0)?;
                Ok(sol.value_at(x)? - (smoothed - sharp))
            })
            .collect::<Result<Vec<f64>>>()?;
        estimates.push(corrected);
    }
    Ok((0..xs.len())
        .map(|k| (4.0 * estimates[1][k] - estimates[0][k]) / 3.0)
        .collect())
}

/// `N(·; y, w²I)` as a payoff.
fn mollifier(y: &[f64], w: f64) -> Payoff {
    let center = y.to_vec();
    let d = y.len() as f64;
    let norm = (2.0 * std::f64::consts::PI * w * w).powf(-0.5 * d);
    Payoff::custom(
        move |p: &[f64]| {
            let r2: f64 = p.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
            norm * (-0.5 * r2 / (w * w)).exp()
        },
        Vec::new(),
        2,
    )
}

/// Frozen-coefficient kernel convolved with `N(0, w²I)` in `y`.
fn frozen_density(c: &ConstantCoefficients, t: f64, x: &[f64], maturity: f64, y: &[f64], w: f64) -> Result<f64> {
    let v = maturity - t;
    let d = x.len();
    let cov = &c.covariance * v + DMatrix::identity(d, d) * (w * w);
    let mean = c.drift.iter().map(|m| m * v).collect();
    let kernel = GaussianKernel::new(t, maturity, mean, cov, c.killing * v)?;
    Ok(kernel.killing_factor() * kernel.density(x, y))
}
