//! Long-horizon evaluation by chaining short-step expansions on a grid.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use super::plan::ExpansionPlan;
use crate::error::{ensure_dim, Error, Result};
use crate::interp::Grid;
use crate::gaussian::Quadrature;
use crate::payoff::Payoff;

/// Grid and quadrature settings for [`bootstrap_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BootstrapSettings {
    /// Grid nodes per axis.
    pub grid_points: usize,
    /// Half-width of the grid in leading-order standard deviations over the
    /// full horizon, beyond the spread of the output points.
    pub width_sd: f64,
    /// Quadrature for the intermediate steps.
    pub step_quadrature: Quadrature,
    /// Largest tolerated leading-order mass outside the grid.
    pub mass_tolerance: f64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings {
            grid_points: 801,
            width_sd: 8.0,
            step_quadrature: Quadrature::GaussHermite { order: 40 },
            mass_tolerance: 1e-8,
        }
    }
}

/// `u(t, x)` for each output point by `steps` backward applications of the
/// order-`N` density over `[t_{k−1}, t_k]`, with uniform steps.
///
/// Intermediate values live on a uniform grid sized from the leading-order
/// kernel over the whole horizon; one step reduces to [`ExpansionPlan::solve`].
pub fn bootstrap_solve(
    plan: &ExpansionPlan,
    payoff: &Payoff,
    t: f64,
    points: &[Vec<f64>],
    maturity: f64,
    steps: usize,
    settings: BootstrapSettings,
) -> Result<Vec<f64>> {
    let d = plan.field().dim();
    if d > 2 {
        return Err(Error::InvalidInput("bootstrapping supports d ≤ 2".into()));
    }
    if steps == 0 || !(t < maturity) {
        return Err(Error::InvalidInput(format!(
            "need steps ≥ 1 and t < T, got {steps} steps on [{t}, {maturity}]"
        )));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    for p in points {
        ensure_dim(d, p.len())?;
    }
    if steps == 1 {
        return points
            .par_iter()
            .map(|x| Ok(plan.solve(payoff, t, x, maturity)?.value))
            .collect();
    }
    if settings.grid_points < 4 {
        return Err(Error::InvalidInput("the bootstrap grid needs at least 4 nodes per axis".into()));
    }

    let plan = plan.clone().with_cache();
    let homogeneous = plan.is_time_homogeneous();
    let dt = (maturity - t) / steps as f64;
    let step_times = |k: usize| -> (f64, f64) {
        if homogeneous {
            (0.0, dt)
        } else {
            (t + (k - 1) as f64 * dt, if k == steps { maturity } else { t + k as f64 * dt })
        }
    };

    let grid = spanning_grid(&plan, t, points, maturity, settings)?;
    let payoff_quad = plan.quadrature_for(payoff);
    let kinks = payoff.kinks();

    // v_{steps−1} from the payoff, then interpolated recursion down to v_1.
    let mut current = grid.clone();
    for k in (2..=steps).rev() {
        let (s0, s1) = step_times(k);
        let previous = current.clone();
        let values = (0..grid.values.len())
            .into_par_iter()
            .map(|flat| {
                let x = grid.node(flat);
                let local = plan.local_expansion(s0, &x, s1)?;
                let density = local.density(&x)?;
                let integral = if k == steps {
                    density.integrate_fn(payoff_quad, &kinks, |y| payoff.value(y))?
                } else {
                    density.integrate_fn(settings.step_quadrature, &[], |y| previous.interpolate(y))?
                };
                Ok(local.kernel.killing_factor() * integral)
            })
            .collect::<Result<Vec<f64>>>()?;
        current.values = values;
    }

    let (s0, s1) = step_times(1);
    points
        .par_iter()
        .map(|x| {
            let local = plan.local_expansion(s0, x, s1)?;
            let integral = local
                .density(x)?
                .integrate_fn(settings.step_quadrature, &[], |y| current.interpolate(y))?;
            Ok(local.kernel.killing_factor() * integral)
        })
        .collect()
}

fn spanning_grid(
    plan: &ExpansionPlan,
    t: f64,
    points: &[Vec<f64>],
    maturity: f64,
    settings: BootstrapSettings,
) -> Result<Grid> {
    let d = points[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut shifted = Vec::with_capacity(points.len());
    let mut sds = Vec::with_capacity(points.len());
    for x in points {
        let kernel = plan.local_expansion(t, x, maturity)?.kernel.clone();
        let mean = kernel.mean(x);
        let sd: Vec<f64> = (0..d).map(|i| kernel.covariance()[(i, i)].sqrt()).collect();
        for i in 0..d {
            lo[i] = lo[i].min(x[i].min(mean[i]) - settings.width_sd * sd[i]);
            hi[i] = hi[i].max(x[i].max(mean[i]) + settings.width_sd * sd[i]);
        }
        shifted.push(mean);
        sds.push(sd);
    }
    let normal = Normal::standard();
    for (mean, sd) in shifted.iter().zip(&sds) {
        let outside: f64 = (0..d)
            .map(|i| normal.cdf(-(hi[i] - mean[i]) / sd[i]) + normal.cdf(-(mean[i] - lo[i]) / sd[i]))
            .sum();
        if outside > settings.mass_tolerance {
            return Err(Error::GridTooNarrow(format!(
                "leading-order mass {outside:.3e} falls outside the grid"
            )));
        }
    }
    Ok(Grid::new(lo, &hi, settings.grid_points))
}
