//! Crank–Nicolson in one dimension and modified Craig–Sneyd ADI in two, on
//! uniform grids with linear-extrapolation boundaries and Richardson
//! extrapolation over nested refinements.

use crate::algebra::MultiIndex;
use crate::basis::CoefficientField;
use crate::error::{ensure_dim, Error, Result};
use crate::gaussian::integrate_interval;
use crate::interp::Grid;
use crate::payoff::Payoff;

/// Boundary treatment at the edges of the truncated domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `∂²u/∂x_i² = 0` across each face: edge values are extrapolated linearly.
    Linear,
}

/// Domain and resolution of a finite-difference solve.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Nodes per axis, boundaries included, on the coarsest level.
    pub points: usize,
    /// Time steps on the coarsest level.
    pub steps: usize,
    /// Implicit half-steps replacing the first Crank–Nicolson step; `None`
    /// picks 4 for payoffs with kinks and 0 otherwise.
    pub rannacher_steps: Option<usize>,
    /// Number of nested levels, each halving `h` and `Δt` (1 disables
    /// extrapolation).
    pub richardson_levels: usize,
    /// Keep every time slice of the coarsest level.
    pub keep_slices: bool,
}

/// Half-width of the default domain in leading-order standard deviations.
pub const DEFAULT_WIDTH_SD: f64 = 10.0;

impl GridSpec {
    /// A grid centred on `x`, so that `x` is a node, extending `width_sd`
    /// frozen standard deviations beyond the drift over `[t, T]`.
    pub fn around(field: &CoefficientField, t: f64, x: &[f64], maturity: f64, width_sd: f64) -> Result<Self> {
        let d = field.dim();
        ensure_dim(d, x.len())?;
        if d > 2 {
            return Err(Error::InvalidInput("finite differences support d ≤ 2".into()));
        }
        let v = maturity - t;
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!("need t < T, got t = {t}, T = {maturity}")));
        }
        let cov = field.covariance_rate(t, x);
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let drift = field.value(&MultiIndex::unit(d, i), t, x) * v;
            let half = width_sd * (cov[(i, i)] * v).sqrt() + drift.abs();
            lo.push(x[i] - half);
            hi.push(x[i] + half);
        }
        let (points, steps, levels) = if d == 1 { (401, 200, 3) } else { (81, 80, 2) };
        Ok(GridSpec {
            lo,
            hi,
            points,
            steps,
            rannacher_steps: None,
            richardson_levels: levels,
            keep_slices: false,
        })
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_richardson_levels(mut self, levels: usize) -> Self {
        self.richardson_levels = levels;
        self
    }

    pub fn with_rannacher_steps(mut self, steps: usize) -> Self {
        self.rannacher_steps = Some(steps);
        self
    }

    pub fn with_slices(mut self) -> Self {
        self.keep_slices = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let d = self.lo.len();
        if d == 0 || d > 2 || self.hi.len() != d {
            return Err(Error::InvalidInput("grid spec needs 1 or 2 axes".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidInput("grid spec needs lo < hi on every axis".into()));
        }
        if self.points < 5 || self.steps == 0 || self.richardson_levels == 0 || self.richardson_levels > 3 {
            return Err(Error::InvalidInput(
                "grid spec needs ≥ 5 points, ≥ 1 step and 1–3 Richardson levels".into(),
            ));
        }
        Ok(())
    }
}

/// Result of [`fd_solve`].
#[derive(Clone, Debug)]
pub struct FdSolution {
    /// Node coordinates per axis (coarsest level).
    pub axes: Vec<Vec<f64>>,
    /// Coarsest-level time steps.
    pub steps: usize,
    pub boundary: Boundary,
    /// Slice times, from `T` down to `t`; only `t` unless slices were kept.
    pub times: Vec<f64>,
    /// Values per slice, flattened with the first axis fastest. The last
    /// slice is the (extrapolated) solution at `t`.
    pub slices: Vec<Vec<f64>>,
    /// Richardson error estimate per node at `t`; zero with one level.
    pub error: Vec<f64>,
    /// Largest cell Péclet number `|a_{e_i}| h_i / (2 a_{2e_i})` seen.
    pub peclet: f64,
    grid: Grid,
    error_grid: Grid,
}

impl FdSolution {
    /// Solution at `t` on the coarsest grid.
    pub fn values(&self) -> &[f64] {
        self.slices.last().expect("at least one slice")
    }

    /// Cubic interpolation of the solution at `t`.
    pub fn value_at(&self, x: &[f64]) -> Result<f64> {
        ensure_dim(self.axes.len(), x.len())?;
        Ok(self.grid.interpolate(x))
    }

    /// Interpolated Richardson error estimate at `x`.
    pub fn error_at(&self, x: &[f64]) -> Result<f64> {
        ensure_dim(self.axes.len(), x.len())?;
        Ok(self.error_grid.interpolate(x).abs())
    }

    pub fn max_error(&self) -> f64 {
        self.error.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// Solves `(∂_t + A)u = 0`, `u(T) = φ` backward from `T` to `t`.
///
/// With `L` Richardson levels the grids have `(n−1)2^ℓ + 1` nodes and
/// `s·2^ℓ` steps; the level values at shared nodes are combined assuming an
/// error expansion in even powers of `h`.
pub fn fd_solve(
    field: &CoefficientField,
    payoff: &Payoff,
    t: f64,
    maturity: f64,
    spec: &GridSpec,
) -> Result<FdSolution> {
    spec.validate()?;
    ensure_dim(field.dim(), spec.lo.len())?;
    if !(t < maturity) {
        return Err(Error::InvalidInput(format!("need t < T, got t = {t}, T = {maturity}")));
    }
    let rannacher = spec
        .rannacher_steps
        .unwrap_or(if payoff.is_smooth() { 0 } else { 4 });
    let mut levels = Vec::with_capacity(spec.richardson_levels);
    let mut peclet: f64 = 0.0;
    let mut coarse_slices = None;
    for level in 0..spec.richardson_levels {
        let scale = 1usize << level;
        let points = (spec.points - 1) * scale + 1;
        let steps = spec.steps * scale;
        let grid = Grid::new(spec.lo.clone(), &spec.hi, points);
        let keep = spec.keep_slices && level == 0;
        let run = match grid.dim() {
            1 => solve_1d(field, payoff, t, maturity, grid, steps, rannacher, keep)?,
            _ => solve_2d(field, payoff, t, maturity, grid, steps, rannacher, keep)?,
        };
        peclet = peclet.max(run.peclet);
        let values = restrict(&run.grid, scale, spec.points);
        if level == 0 {
            coarse_slices = Some((run.times, run.slices));
        }
        levels.push(values);
    }
    let (values, error) = extrapolate(&levels);
    let (mut times, mut slices) = coarse_slices.expect("level 0 ran");
    if !spec.keep_slices {
        times = vec![t];
        slices = Vec::new();
    }
    slices.push(values.clone());
    if times.last() != Some(&t) {
        times.push(t);
    }
    let mut grid = Grid::new(spec.lo.clone(), &spec.hi, spec.points);
    grid.values = values;
    let mut error_grid = grid.clone();
    error_grid.values = error.clone();
    if slices.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("finite-difference solution is not finite".into()));
    }
    Ok(FdSolution {
        axes: (0..grid.dim()).map(|i| grid.axis(i)).collect(),
        steps: spec.steps,
        boundary: Boundary::Linear,
        times,
        slices,
        error,
        peclet,
        grid,
        error_grid,
    })
}

/// `u(t, x)` and its error estimate from a solve on [`GridSpec::around`].
pub fn fd_value(
    field: &CoefficientField,
    payoff: &Payoff,
    t: f64,
    x: &[f64],
    maturity: f64,
    spec: Option<GridSpec>,
) -> Result<(f64, f64)> {
    let spec = match spec {
        Some(s) => s,
        None => GridSpec::around(field, t, x, maturity, DEFAULT_WIDTH_SD)?,
    };
    let sol = fd_solve(field, payoff, t, maturity, &spec)?;
    Ok((sol.value_at(x)?, sol.error_at(x)?))
}

fn restrict(grid: &Grid, scale: usize, coarse: usize) -> Vec<f64> {
    match grid.dim() {
        1 => (0..coarse).map(|i| grid.values[i * scale]).collect(),
        _ => {
            let mut out = Vec::with_capacity(coarse * coarse);
            for j in 0..coarse {
                for i in 0..coarse {
                    out.push(grid.values[i * scale + grid.n * j * scale]);
                }
            }
            out
        }
    }
}

/// Richardson tableau in `h²`; the error estimate is the difference between
/// the last two diagonal entries.
fn extrapolate(levels: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = levels[0].len();
    match levels.len() {
        1 => (levels[0].clone(), vec![0.0; n]),
        2 => {
            let r: Vec<f64> = (0..n).map(|i| (4.0 * levels[1][i] - levels[0][i]) / 3.0).collect();
            let e = (0..n).map(|i| r[i] - levels[1][i]).collect();
            (r, e)
        }
        _ => {
            let mut r = Vec::with_capacity(n);
            let mut e = Vec::with_capacity(n);
            for i in 0..n {
                let r1 = (4.0 * levels[1][i] - levels[0][i]) / 3.0;
                let r2 = (4.0 * levels[2][i] - levels[1][i]) / 3.0;
                let r3 = (16.0 * r2 - r1) / 15.0;
                r.push(r3);
                e.push(r3 - r2);
            }
            (r, e)
        }
    }
}

struct LevelRun {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<Vec<f64>>,
    peclet: f64,
}

/// Terminal values; cell averages when the payoff has kinks so that the
/// initial error stays second order.
fn terminal_values(payoff: &Payoff, grid: &Grid) -> Vec<f64> {
    let kinks = payoff.kinks();
    let h = grid.step[0];
    (0..grid.values.len())
        .map(|flat| {
            let node = grid.node(flat);
            if kinks.is_empty() {
                return payoff.value(&node);
            }
            let (a, b) = (node[0] - 0.5 * h, node[0] + 0.5 * h);
            let mut cuts = vec![a];
            cuts.extend(kinks.iter().copied().filter(|k| *k > a && *k < b));
            cuts.push(b);
            let mut y = node.clone();
            let total: f64 = cuts
                .windows(2)
                .map(|w| {
                    integrate_interval(8, w[0], w[1], |s| {
                        y[0] = s;
                        payoff.value(&y)
                    })
                })
                .sum();
            total / h
        })
        .collect()
}

/// Second-order central coefficients of one axis at one node:
/// `(lower, diag, upper)` weights of `u_{i−1}, u_i, u_{i+1}`.
#[derive(Clone, Copy, Debug, Default)]
struct Stencil {
    lower: f64,
    diag: f64,
    upper: f64,
}

impl Stencil {
    fn new(diffusion: f64, drift: f64, reaction: f64, h: f64) -> Self {
        let a = diffusion / (h * h);
        let b = drift / (2.0 * h);
        Stencil {
            lower: a - b,
            diag: -2.0 * a + reaction,
            upper: a + b,
        }
    }

    fn apply(&self, um: f64, u: f64, up: f64) -> f64 {
        self.lower * um + self.diag * u + self.upper * up
    }
}

fn peclet(diffusion: f64, drift: f64, h: f64) -> f64 {
    if diffusion > 0.0 {
        drift.abs() * h / (2.0 * diffusion)
    } else {
        f64::INFINITY
    }
}

/// Solves `(I − c S) u = rhs` on interior nodes `1..n−1` of a line whose end
/// values are linear extrapolations of their neighbours; writes all of `u`.
fn implicit_line(stencils: &[Stencil], c: f64, rhs: &[f64], u: &mut [f64], work: &mut Vec<(f64, f64)>) -> Result<()> {
    let n = rhs.len();
    let m = n - 2;
    // Row k ↔ node k+1; sub, diag, sup after substituting the boundary rows.
    let row = |k: usize| -> (f64, f64, f64) {
        let s = stencils[k + 1];
        let (mut l, mut d, mut r) = (-c * s.lower, 1.0 - c * s.diag, -c * s.upper);
        if k == 0 {
            // u_0 = 2u_1 − u_2
            d += 2.0 * l;
            r -= l;
            l = 0.0;
        }
        if k == m - 1 {
            // u_{n−1} = 2u_{n−2} − u_{n−3}
            d += 2.0 * r;
            l -= r;
            r = 0.0;
        }
        (l, d, r)
    };
    work.clear();
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for k in 0..m {
        let (l, d, r) = row(k);
        let denom = d - l * prev_c;
        if denom.abs() < 1e-300 {
            return Err(Error::Numerical("singular tridiagonal system".into()));
        }
        let cc = r / denom;
        let dd = (rhs[k + 1] - l * prev_d) / denom;
        work.push((cc, dd));
        prev_c = cc;
        prev_d = dd;
    }
    let mut next = 0.0;
    for k in (0..m).rev() {
        let (cc, dd) = work[k];
        let v = dd - cc * next;
        u[k + 1] = v;
        next = v;
    }
    // Row 0 of the reduced system lost its explicit `l`, and the last lost `r`,
    // so the boundary values are recovered here.
    u[0] = 2.0 * u[1] - u[2];
    u[n - 1] = 2.0 * u[n - 2] - u[n - 3];
    Ok(())
}

fn stencils_1d(field: &CoefficientField, s: f64, xs: &[f64], h: f64, pe: &mut f64) -> Vec<Stencil> {
    let e2 = MultiIndex::from(vec![2]);
    let e1 = MultiIndex::from(vec![1]);
    let e0 = MultiIndex::from(vec![0]);
    xs.iter()
        .map(|&x| {
            let p = [x];
            let (a2, a1, a0) = (field.value(&e2, s, &p), field.value(&e1, s, &p), field.value(&e0, s, &p));
            *pe = pe.max(peclet(a2, a1, h));
            Stencil::new(a2, a1, a0, h)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn solve_1d(
    field: &CoefficientField,
    payoff: &Payoff,
    t: f64,
    maturity: f64,
    mut grid: Grid,
    steps: usize,
    rannacher: usize,
    keep: bool,
) -> Result<LevelRun> {
    let xs = grid.axis(0);
    let h = grid.step[0];
    let n = xs.len();
    let dt = (maturity - t) / steps as f64;
    let homogeneous = field.is_time_homogeneous();
    let mut pe: f64 = 0.0;
    let mut u = terminal_values(payoff, &grid);
    let mut times = vec![maturity];
    let mut slices = if keep { vec![u.clone()] } else { Vec::new() };
    let fixed = homogeneous.then(|| stencils_1d(field, t, &xs, h, &mut pe));
    let at = |s: f64, pe: &mut f64| match &fixed {
        Some(st) => st.clone(),
        None => stencils_1d(field, s, &xs, h, pe),
    };
    let mut rhs = vec![0.0; n];
    let mut work = Vec::with_capacity(n);
    let mut step = |u: &mut Vec<f64>, s_hi: f64, s_lo: f64, theta: f64, pe: &mut f64| -> Result<()> {
        let k = s_hi - s_lo;
        let explicit = at(s_hi, pe);
        let implicit = at(s_lo, pe);
        for i in 1..n - 1 {
            rhs[i] = u[i] + (1.0 - theta) * k * explicit[i].apply(u[i - 1], u[i], u[i + 1]);
        }
        implicit_line(&implicit, theta * k, &rhs, u, &mut work)
    };
    let half_steps = rannacher.min(2 * steps);
    let mut s = maturity;
    for _ in 0..half_steps {
        let next = s - 0.5 * dt;
        step(&mut u, s, next, 1.0, &mut pe)?;
        s = next;
    }
    let cn_steps = steps - half_steps.div_ceil(2);
    if half_steps % 2 == 1 {
        let next = s - 0.5 * dt;
        step(&mut u, s, next, 0.5, &mut pe)?;
        s = next;
    }
    for k in 0..cn_steps {
        let next = if k + 1 == cn_steps { t } else { s - dt };
        step(&mut u, s, next, 0.5, &mut pe)?;
        s = next;
        if keep {
            times.push(s);
            slices.push(u.clone());
        }
    }
    grid.values = u;
    if keep {
        slices.pop();
        times.pop();
    }
    Ok(LevelRun {
        grid,
        times,
        slices,
        peclet: pe,
    })
}

/// Per-node coefficients of the 2-d operator.
struct Coefficients2 {
    x: Vec<Stencil>,
    y: Vec<Stencil>,
    cross: Vec<f64>,
}

fn coefficients_2d(field: &CoefficientField, s: f64, grid: &Grid, pe: &mut f64) -> Coefficients2 {
    let idx = |a: u32, b: u32| MultiIndex::from(vec![a, b]);
    let (hx, hy) = (grid.step[0], grid.step[1]);
    let total = grid.values.len();
    let mut out = Coefficients2 {
        x: Vec::with_capacity(total),
        y: Vec::with_capacity(total),
        cross: Vec::with_capacity(total),
    };
    let (e20, e10, e02, e01, e11, e00) = (idx(2, 0), idx(1, 0), idx(0, 2), idx(0, 1), idx(1, 1), idx(0, 0));
    for flat in 0..total {
        let p = grid.node(flat);
        let a0 = field.value(&e00, s, &p);
        let (a20, a10) = (field.value(&e20, s, &p), field.value(&e10, s, &p));
        let (a02, a01) = (field.value(&e02, s, &p), field.value(&e01, s, &p));
        *pe = pe.max(peclet(a20, a10, hx)).max(peclet(a02, a01, hy));
        out.x.push(Stencil::new(a20, a10, 0.5 * a0, hx));
        out.y.push(Stencil::new(a02, a01, 0.5 * a0, hy));
        out.cross.push(field.value(&e11, s, &p) / (4.0 * hx * hy));
    }
    out
}

/// `(F_0 u, F_1 u, F_2 u)` at interior nodes: mixed, first-axis and
/// second-axis parts. Boundary entries are zero.
fn split_operator(c: &Coefficients2, u: &[f64], n: usize) -> [Vec<f64>; 3] {
    let mut f = [vec![0.0; u.len()], vec![0.0; u.len()], vec![0.0; u.len()]];
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = i + n * j;
            f[0][k] = c.cross[k] * (u[k + 1 + n] - u[k + 1 - n] - u[k - 1 + n] + u[k - 1 - n]);
            f[1][k] = c.x[k].apply(u[k - 1], u[k], u[k + 1]);
            f[2][k] = c.y[k].apply(u[k - n], u[k], u[k + n]);
        }
    }
    f
}

fn set_boundary_2d(u: &mut [f64], n: usize) {
    for j in 0..n {
        u[n * j] = 2.0 * u[1 + n * j] - u[2 + n * j];
        u[n - 1 + n * j] = 2.0 * u[n - 2 + n * j] - u[n - 3 + n * j];
    }
    for i in 0..n {
        u[i] = 2.0 * u[i + n] - u[i + 2 * n];
        u[i + n * (n - 1)] = 2.0 * u[i + n * (n - 2)] - u[i + n * (n - 3)];
    }
}

/// `Y ← solve (I − θk F_axis) Y = rhs` line by line; `rhs` on interior nodes.
fn implicit_axis(c: &Coefficients2, axis: usize, ck: f64, rhs: &[f64], y: &mut [f64], n: usize) -> Result<()> {
    let mut line_rhs = vec![0.0; n];
    let mut line_u = vec![0.0; n];
    let mut stencils = vec![Stencil::default(); n];
    let mut work = Vec::with_capacity(n);
    for line in 1..n - 1 {
        let at = |k: usize| if axis == 0 { k + n * line } else { line + n * k };
        for k in 0..n {
            line_rhs[k] = rhs[at(k)];
            stencils[k] = if axis == 0 { c.x[at(k)] } else { c.y[at(k)] };
        }
        implicit_line(&stencils, ck, &line_rhs, &mut line_u, &mut work)?;
        for k in 0..n {
            y[at(k)] = line_u[k];
        }
    }
    set_boundary_2d(y, n);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve_2d(
    field: &CoefficientField,
    payoff: &Payoff,
    t: f64,
    maturity: f64,
    mut grid: Grid,
    steps: usize,
    rannacher: usize,
    keep: bool,
) -> Result<LevelRun> {
    let n = grid.n;
    let dt = (maturity - t) / steps as f64;
    let mut pe: f64 = 0.0;
    let homogeneous = field.is_time_homogeneous();
    let mut u = terminal_values(payoff, &grid);
    set_boundary_2d(&mut u, n);
    let mut times = vec![maturity];
    let mut slices = if keep { vec![u.clone()] } else { Vec::new() };
    let fixed = homogeneous.then(|| coefficients_2d(field, t, &grid, &mut pe));

    let run_step = |u: &mut Vec<f64>, s_hi: f64, s_lo: f64, mcs: bool, pe: &mut f64| -> Result<()> {
        let k = s_hi - s_lo;
        let owned_hi;
        let owned_lo;
        let (c_hi, c_lo) = match &fixed {
            Some(c) => (c, c),
            None => {
                owned_hi = coefficients_2d(field, s_hi, &grid, pe);
                owned_lo = coefficients_2d(field, s_lo, &grid, pe);
                (&owned_hi, &owned_lo)
            }
        };
        let theta = if mcs { 1.0 / 3.0 } else { 1.0 };
        let f_prev = split_operator(c_hi, u, n);
        let total = u.len();
        let mut y0: Vec<f64> = (0..total).map(|i| u[i] + k * (f_prev[0][i] + f_prev[1][i] + f_prev[2][i])).collect();
        set_boundary_2d(&mut y0, n);
        let stages = |start: &[f64], out: &mut Vec<f64>| -> Result<()> {
            let mut rhs: Vec<f64> = (0..total).map(|i| start[i] - theta * k * f_prev[1][i]).collect();
            let mut y1 = vec![0.0; total];
            implicit_axis(c_lo, 0, theta * k, &rhs, &mut y1, n)?;
            for i in 0..total {
                rhs[i] = y1[i] - theta * k * f_prev[2][i];
            }
            implicit_axis(c_lo, 1, theta * k, &rhs, out, n)
        };
        let mut y2 = vec![0.0; total];
        stages(&y0, &mut y2)?;
        if !mcs {
            *u = y2;
            return Ok(());
        }
        let f2 = split_operator(c_lo, &y2, n);
        let mut y0t: Vec<f64> = (0..total)
            .map(|i| {
                let hat = y0[i] + theta * k * (f2[0][i] - f_prev[0][i]);
                let full_new = f2[0][i] + f2[1][i] + f2[2][i];
                let full_old = f_prev[0][i] + f_prev[1][i] + f_prev[2][i];
                hat + (0.5 - theta) * k * (full_new - full_old)
            })
            .collect();
        set_boundary_2d(&mut y0t, n);
        stages(&y0t, u)
    };

    let half_steps = rannacher.min(2 * steps);
    let mut s = maturity;
    for _ in 0..half_steps {
        let next = s - 0.5 * dt;
        run_step(&mut u, s, next, false, &mut pe)?;
        s = next;
    }
    if half_steps % 2 == 1 {
        let next = s - 0.5 * dt;
        run_step(&mut u, s, next, true, &mut pe)?;
        s = next;
    }
    let mcs_steps = steps - half_steps.div_ceil(2);
    for k in 0..mcs_steps {
        let next = if k + 1 == mcs_steps { t } else { s - dt };
        run_step(&mut u, s, next, true, &mut pe)?;
        s = next;
        if keep {
            times.push(s);
            slices.push(u.clone());
        }
    }
    grid.values = u;
    if keep {
        slices.pop();
        times.pop();
    }
    Ok(LevelRun {
        grid,
        times,
        slices,
        peclet: pe,
    })
}
