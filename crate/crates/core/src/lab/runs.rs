use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Experiment, OracleKind};
use crate::engine::{bootstrap_solve, BootstrapSettings};
use crate::error::{Error, Result};
use crate::oracles::{
    exact_constant_solution, fd_density, fd_solve, heat_kernel_bound, mc_solve, ConstantCoefficients, GridSpec,
};

/// Rows of one run with their slope fits and remarks.
#[derive(Clone, Debug, Serialize)]
pub struct Report<R> {
    pub rows: Vec<R>,
    pub fits: Vec<SlopeFit>,
    pub warnings: Vec<String>,
    pub elapsed_seconds: f64,
}

/// Least-squares slope of `log error` against `log scale` for one order.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SlopeFit {
    pub order: usize,
    /// Evaluation point, `;`-separated.
    pub x: String,
    /// `None` when fewer than two rows are above the oracle floor.
    pub slope: Option<f64>,
    /// Root-mean-square residual of the fit in log space.
    pub residual: Option<f64>,
    /// Rows used in the fit.
    pub used: usize,
    pub expected: f64,
    /// `slope ≥ expected − tolerance`; `None` without a fit.
    pub passes: Option<bool>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PriceRow {
    pub order: usize,
    pub t: f64,
    pub x: String,
    pub maturity: f64,
    pub value: f64,
    /// `u_0..u_N`, `;`-separated.
    pub terms: String,
    pub oracle: f64,
    pub oracle_error: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConvergenceRow {
    pub order: usize,
    pub k: u8,
    pub x: String,
    pub horizon: f64,
    pub error: f64,
    pub oracle_error: f64,
    /// Excluded from the fit: `|error| < floor_factor × oracle_error`.
    pub floor: bool,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BootstrapRow {
    pub order: usize,
    pub k: u8,
    pub x: String,
    pub steps: usize,
    pub value: f64,
    pub error: f64,
    pub oracle_error: f64,
    pub floor: bool,
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DensityRow {
    pub order: usize,
    pub x: String,
    pub y: String,
    pub horizon: f64,
    pub gamma_bar: f64,
    pub gamma_oracle: f64,
    pub abs_error: f64,
    pub heat_bound: f64,
    /// `|Γ − Γ̄_N| / Γ^{M+ε}`.
    pub ratio: f64,
}

pub(crate) fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";")
}

/// Least-squares slope and RMS residual of `log|y|` against `log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    if lx.iter().chain(&ly).any(|v| !v.is_finite()) {
        return None;
    }
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let rss: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    Some((slope, (rss / n).sqrt()))
}

/// Reference value and its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub error: f64,
}

/// Smallest error an oracle is credited with, relative to `max(1, |u|)`.
const ORACLE_FLOOR: f64 = 1e-14;

impl Experiment {
    pub(crate) fn fd_spec(&self, t: f64, x: &[f64], maturity: f64) -> Result<GridSpec> {
        let o = &self.config.oracle;
        let mut spec = GridSpec::around(&self.field, t, x, maturity, o.fd_width_sd)?;
        if let Some(p) = o.fd_points {
            spec = spec.with_points(p);
        }
        if let Some(s) = o.fd_steps {
            spec = spec.with_steps(s);
        }
        if let Some(l) = o.fd_richardson_levels {
            spec = spec.with_richardson_levels(l);
        }
        Ok(spec)
    }

    /// `u(t, x)` for the configured payoff from the configured oracle.
    pub fn oracle_value(&self, x: &[f64], maturity: f64) -> Result<OracleValue> {
        let t = self.config.evaluation.t;
        let (value, error) = match self.config.oracle.kind {
            OracleKind::Fd => {
                let spec = self.fd_spec(t, x, maturity)?;
                let sol = fd_solve(&self.field, &self.payoff, t, maturity, &spec)?;
                (sol.value_at(x)?, sol.error_at(x)?)
            }
            OracleKind::Mc => {
                let est = mc_solve(&self.field, &self.payoff, t, x, maturity, self.mc_settings())?;
                (est.value, est.std_error)
            }
            OracleKind::Exact => {
                let frozen = ConstantCoefficients::frozen(&self.field, t, x)?;
                (exact_constant_solution(&frozen, &self.payoff, t, x, maturity)?, 0.0)
            }
        };
        Ok(OracleValue {
            value,
            error: error.max(ORACLE_FLOOR * value.abs().max(1.0)),
        })
    }

    fn jobs(&self, horizons: &[f64]) -> Vec<(Vec<f64>, f64)> {
        self.points
            .iter()
            .flat_map(|x| horizons.iter().map(move |h| (x.clone(), *h)))
            .collect()
    }

    fn fit(&self, order: usize, x: &[f64], scales: &[f64], errors: &[f64], expected: f64) -> SlopeFit {
        let fit = fit_slope(scales, errors);
        SlopeFit {
            order,
            x: join(x),
            slope: fit.map(|f| f.0),
            residual: fit.map(|f| f.1),
            used: if fit.is_some() { scales.len() } else { 0 },
            expected,
            passes: fit.map(|f| f.0 >= expected - self.config.fit.tolerance),
        }
    }

    fn is_floor(&self, error: f64, oracle_error: f64) -> bool {
        error.abs() < self.config.fit.floor_factor * oracle_error
    }
}

fn finish<R>(rows: Vec<R>, fits: Vec<SlopeFit>, exp: &Experiment, start: Instant) -> Report<R> {
    Report {
        rows,
        fits,
        warnings: exp.warnings.clone(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}

/// `ū_N` against the oracle for every point, horizon and order.
pub fn run_price(exp: &Experiment) -> Result<Report<PriceRow>> {
    let start = Instant::now();
    let t = exp.config.evaluation.t;
    let orders = &exp.config.scheme.orders;
    let blocks = exp
        .jobs(&exp.config.evaluation.horizons)
        .into_par_iter()
        .map(|(x, h)| {
            let maturity = t + h;
            let oracle = exp.oracle_value(&x, maturity)?;
            orders
                .iter()
                .map(|&n| {
                    let sol = exp.plan(n, &x)?.solve(&exp.payoff, t, &x, maturity)?;
                    Ok(PriceRow {
                        order: n,
                        t,
                        x: join(&x),
                        maturity,
                        value: sol.value,
                        terms: join(&sol.terms),
                        oracle: oracle.value,
                        oracle_error: oracle.error,
                        abs_error: (sol.value - oracle.value).abs(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(blocks.into_iter().flatten().collect(), Vec::new(), exp, start))
}

/// Error against horizon per order, with the fitted rate `(N+k+1)/2`.
pub fn run_convergence(exp: &Experiment) -> Result<Report<ConvergenceRow>> {
    let horizons = &exp.config.evaluation.horizons;
    let (lo, hi) = horizons
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), h| (a.min(*h), b.max(*h)));
    if horizons.len() < 4 || hi < 10.0 * lo {
        return Err(Error::Config(
            "evaluation.horizons: convergence sweeps need ≥ 4 horizons spanning at least a decade".into(),
        ));
    }
    let price = run_price(exp)?;
    let k = exp.smoothness;
    let mut rows: Vec<ConvergenceRow> = price
        .rows
        .iter()
        .map(|r| ConvergenceRow {
            order: r.order,
            k,
            x: r.x.clone(),
            horizon: r.maturity - r.t,
            error: r.value - r.oracle,
            oracle_error: r.oracle_error,
            floor: exp.is_floor(r.value - r.oracle, r.oracle_error),
            slope: None,
        })
        .collect();
    let mut fits = Vec::new();
    for x in &exp.points {
        let key = join(x);
        for &n in &exp.config.scheme.orders {
            let (scales, errors): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.order == n && r.x == key && !r.floor)
                .map(|r| (r.horizon, r.error))
                .unzip();
            let fit = exp.fit(n, x, &scales, &errors, (n as f64 + k as f64 + 1.0) / 2.0);
            for r in rows.iter_mut().filter(|r| r.order == n && r.x == key) {
                r.slope = fit.slope;
            }
            fits.push(fit);
        }
    }
    Ok(Report {
        rows,
        fits,
        warnings: price.warnings,
        elapsed_seconds: price.elapsed_seconds,
    })
}

/// Bootstrapped error against `1/m`, with the fitted rate `(N+k−1)/2`.
pub fn run_bootstrap(exp: &Experiment) -> Result<Report<BootstrapRow>> {
    let start = Instant::now();
    let ev = &exp.config.evaluation;
    if ev.bootstrap_steps.len() < 4 {
        return Err(Error::Config(
            "evaluation.bootstrap_steps: bootstrap sweeps need at least 4 step counts".into(),
        ));
    }
    let t = ev.t;
    let maturity = t + ev.bootstrap_horizon;
    let settings = BootstrapSettings {
        grid_points: ev.bootstrap_points,
        ..BootstrapSettings::default()
    };
    let k = exp.smoothness;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for x in &exp.points {
        let oracle = exp.oracle_value(x, maturity)?;
        for &n in &exp.config.scheme.orders {
            let plan = exp.plan(n, x)?;
            let mut block = Vec::new();
            for &m in &ev.bootstrap_steps {
                let value = bootstrap_solve(&plan, &exp.payoff, t, std::slice::from_ref(x), maturity, m, settings)?[0];
                let error = value - oracle.value;
                block.push(BootstrapRow {
                    order: n,
                    k,
                    x: join(x),
                    steps: m,
                    value,
                    error,
                    oracle_error: oracle.error,
                    floor: exp.is_floor(error, oracle.error),
                    slope: None,
                });
            }
            let (scales, errors): (Vec<f64>, Vec<f64>) = block
                .iter()
                .filter(|r| !r.floor)
                .map(|r| (1.0 / r.steps as f64, r.error))
                .unzip();
            let fit = exp.fit(n, x, &scales, &errors, (n as f64 + k as f64 - 1.0) / 2.0);
            for r in &mut block {
                r.slope = fit.slope;
            }
            rows.extend(block);
            fits.push(fit);
        }
    }
    Ok(finish(rows, fits, exp, start))
}

/// `Γ̄_N` against the density oracle on the configured lattice, with the
/// fitted decay `(N+1)/2` of the sampled maximum of `|Γ − Γ̄_N|/Γ^{M+ε}`.
pub fn run_density(exp: &Experiment) -> Result<Report<DensityRow>> {
    let start = Instant::now();
    let cfg = &exp.config.density;
    let t = exp.config.evaluation.t;
    let x0 = exp.points[0].clone();
    let bound = exp.field.ellipticity() + cfg.epsilon;
    let mut rows = Vec::new();
    for &h in &exp.config.evaluation.horizons {
        let maturity = t + h;
        let sd = (exp.field.covariance_rate(t, &x0)[(0, 0)] * h).sqrt();
        let shifted = |off: f64| {
            let mut p = x0.clone();
            p[0] += off * sd;
            p
        };
        let xs: Vec<Vec<f64>> = cfg.x_offsets.iter().map(|o| shifted(*o)).collect();
        let ys: Vec<Vec<f64>> = cfg.y_offsets.iter().map(|o| shifted(*o)).collect();
        let oracle = density_oracle(exp, &xs, &ys, t, maturity, sd)?;
        let plans = exp
            .config
            .scheme
            .orders
            .iter()
            .map(|&n| Ok((n, exp.plan(n, &x0)?)))
            .collect::<Result<Vec<_>>>()?;
        let block = xs
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut out = Vec::new();
                for (n, plan) in &plans {
                    let local = plan.local_expansion(t, x, maturity)?;
                    for (j, y) in ys.iter().enumerate() {
                        let gamma_bar = local.fundamental_solution(x, y)?;
                        let heat = heat_kernel_bound(bound, t, x, maturity, y)?;
                        let err = (oracle[j][i] - gamma_bar).abs();
                        out.push(DensityRow {
                            order: *n,
                            x: join(x),
                            y: join(y),
                            horizon: h,
                            gamma_bar,
                            gamma_oracle: oracle[j][i],
                            abs_error: err,
                            heat_bound: heat,
                            ratio: err / heat,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.extend(block.into_iter().flatten());
    }
    let mut fits = Vec::new();
    let mut warnings = exp.warnings.clone();
    for &n in &exp.config.scheme.orders {
        let (scales, maxima): (Vec<f64>, Vec<f64>) = exp
            .config
            .evaluation
            .horizons
            .iter()
            .map(|&h| {
                let m = rows
                    .iter()
                    .filter(|r| r.order == n && r.horizon == h)
                    .fold(0.0_f64, |m, r| m.max(r.ratio));
                (h, m)
            })
            .unzip();
        if maxima.iter().any(|m| !m.is_finite()) {
            warnings.push(format!("N = {n}: the ratio to the heat-kernel bound is not finite"));
        }
        fits.push(exp.fit(n, &x0, &scales, &maxima, (n as f64 + 1.0) / 2.0));
    }
    Ok(Report {
        rows,
        fits,
        warnings,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `oracle[j][i] = Γ(t, x_i; T, y_j)`.
fn density_oracle(
    exp: &Experiment,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    t: f64,
    maturity: f64,
    sd: f64,
) -> Result<Vec<Vec<f64>>> {
    match exp.config.oracle.kind {
        OracleKind::Fd => {
            let d = xs[0].len();
            let o = &exp.config.oracle;
            let reach = xs.iter().chain(ys).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p[0]), b.max(p[0]))
            });
            let mut spec = exp.fd_spec(t, &xs[0], maturity)?;
            spec.lo[0] = reach.0 - o.fd_width_sd * sd;
            spec.hi[0] = reach.1 + o.fd_width_sd * sd;
            if d == 1 {
                spec = spec
                    .with_points(o.fd_points.unwrap_or(1601))
                    .with_steps(o.fd_steps.unwrap_or(400));
            }
            spec = spec.with_rannacher_steps(0);
            ys.par_iter()
                .map(|y| fd_density(&exp.field, t, xs, maturity, y, &spec, exp.config.density.mollifier_cells))
                .collect()
        }
        OracleKind::Exact => ys
            .iter()
            .map(|y| {
                xs.iter()
                    .map(|x| {
                        let c = ConstantCoefficients::frozen(&exp.field, t, x)?;
                        let v = maturity - t;
                        let mean = c.drift.iter().map(|m| m * v).collect();
                        let kernel =
                            crate::gaussian::GaussianKernel::new(t, maturity, mean, &c.covariance * v, c.killing * v)?;
                        Ok(kernel.killing_factor() * kernel.density(x, y))
                    })
                    .collect()
            })
            .collect(),
        OracleKind::Mc => Err(Error::Config(
            "oracle.kind: the density run supports the fd and exact oracles".into(),
        )),
    }
}
