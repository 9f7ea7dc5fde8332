//! Quadrature rules against Gaussian measures.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

type Rule = Arc<[(f64, f64)]>;

/// How to integrate against a Gaussian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quadrature {
    /// Tensor Gauss–Hermite with `order` nodes per axis, mapped through the
    /// Cholesky factor of the covariance.
    GaussHermite { order: usize },
    /// Tensor trapezoid rule with `points` nodes per axis over
    /// `±width_sd` standard deviations.
    Trapezoid { points: usize, width_sd: f64 },
    /// Gauss–Legendre panels on the first whitened axis, split at the payoff's
    /// kinks, over `±width_sd`; Gauss–Hermite of the same order on the other axes.
    KinkSplit { order: usize, width_sd: f64 },
}

impl Quadrature {
    /// Order 40 for smooth integrands.
    pub const SMOOTH: Quadrature = Quadrature::GaussHermite { order: 40 };
    /// Order 60 for integrands with kinks.
    pub const NON_SMOOTH: Quadrature = Quadrature::GaussHermite { order: 60 };

    pub fn validate(&self) -> Result<()> {
        let order = match self {
            Quadrature::GaussHermite { order } | Quadrature::KinkSplit { order, .. } => *order,
            Quadrature::Trapezoid { points, .. } => *points,
        };
        if order < 1 {
            return Err(Error::Quadrature("quadrature order must be at least 1".into()));
        }
        if let Quadrature::Trapezoid { width_sd, .. } | Quadrature::KinkSplit { width_sd, .. } = self {
            if !(*width_sd > 0.0) {
                return Err(Error::Quadrature("quadrature width must be positive".into()));
            }
        }
        Ok(())
    }
}

fn cache() -> &'static Mutex<HashMap<(u8, usize), Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, usize), Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(kind: u8, order: usize, build: impl FnOnce() -> Vec<(f64, f64)>) -> Rule {
    if let Some(rule) = cache().lock().expect("rule cache poisoned").get(&(kind, order)) {
        return rule.clone();
    }
    let rule: Rule = build().into();
    cache()
        .lock()
        .expect("rule cache poisoned")
        .entry((kind, order))
        .or_insert(rule)
        .clone()
}

/// Nodes and weights for `∫ f(z) φ(z) dz` with `φ` the standard normal density.
pub fn standard_normal_rule(order: usize) -> Rule {
    cached(0, order, || {
        let gh = GaussHermite::new(order.max(1).try_into().expect("positive order"));
        let scale = std::f64::consts::PI.sqrt().recip();
        gh.as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (std::f64::consts::SQRT_2 * x, w * scale))
            .collect()
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn legendre_rule(order: usize) -> Rule {
    cached(1, order, || {
        let gl = GaussLegendre::new(order.max(1).try_into().expect("positive order"));
        gl.as_node_weight_pairs().to_vec()
    })
}

/// `∫_a^b f(s) ds` by Gauss–Legendre.
pub fn integrate_interval(order: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    legendre_rule(order)
        .iter()
        .map(|&(x, w)| w * half * f(mid + half * x))
        .sum()
}

/// Expectation `E[f(μ + L z)]` for `z ~ N(0, I)`; `f` receives `(z, y)`.
///
/// `kinks` are breakpoints of `f` along the first coordinate of `y`; they are
/// only honoured by [`Quadrature::KinkSplit`].
pub fn gaussian_expectation<F>(
    mean: &[f64],
    chol: &DMatrix<f64>,
    quadrature: Quadrature,
    kinks: &[f64],
    mut f: F,
) -> Result<f64>
where
    F: FnMut(&[f64], &[f64]) -> f64,
{
    let mut total = 0.0;
    visit_gaussian_nodes(mean, chol, quadrature, kinks, |w, z, y| total += w * f(z, y))?;
    Ok(total)
}

/// Calls `visit(weight, z, y)` for every tensor node, with `y = μ + L z` and
/// weights summing to one.
pub fn visit_gaussian_nodes<V>(
    mean: &[f64],
    chol: &DMatrix<f64>,
    quadrature: Quadrature,
    kinks: &[f64],
    mut visit: V,
) -> Result<()>
where
    V: FnMut(f64, &[f64], &[f64]),
{
    quadrature.validate()?;
    let d = mean.len();
    let axis_rules: Vec<Vec<(f64, f64)>> = match quadrature {
        Quadrature::GaussHermite { order } => vec![standard_normal_rule(order).to_vec(); d],
        Quadrature::Trapezoid { points, width_sd } => {
            vec![trapezoid_rule(points, width_sd); d]
        }
        Quadrature::KinkSplit { order, width_sd } => {
            let l00 = chol[(0, 0)];
            let mut cuts: Vec<f64> = kinks
                .iter()
                .map(|k| (k - mean[0]) / l00)
                .filter(|z| z.abs() < width_sd)
                .collect();
            cuts.sort_by(f64::total_cmp);
            let mut rules = vec![split_legendre_rule(order, width_sd, &cuts)];
            rules.extend(std::iter::repeat(standard_normal_rule(order).to_vec()).take(d - 1));
            rules
        }
    };
    if d == 0 || axis_rules.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut z = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut idx = vec![0usize; d];
    loop {
        let mut w = 1.0;
        for i in 0..d {
            let (zi, wi) = axis_rules[i][idx[i]];
            z[i] = zi;
            w *= wi;
        }
        for i in 0..d {
            let mut acc = mean[i];
            for j in 0..=i {
                acc += chol[(i, j)] * z[j];
            }
            y[i] = acc;
        }
        visit(w, &z, &y);
        // odometer increment
        let mut k = 0;
        loop {
            if k == d {
                return Ok(());
            }
            idx[k] += 1;
            if idx[k] < axis_rules[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn trapezoid_rule(points: usize, width_sd: f64) -> Vec<(f64, f64)> {
    if points == 1 {
        return vec![(0.0, 1.0)];
    }
    let h = 2.0 * width_sd / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let z = -width_sd + i as f64 * h;
            let end = i == 0 || i == points - 1;
            (z, h * if end { 0.5 } else { 1.0 } * normal_pdf(z))
        })
        .collect()
}

fn split_legendre_rule(order: usize, width_sd: f64, cuts: &[f64]) -> Vec<(f64, f64)> {
    let mut edges = vec![-width_sd];
    edges.extend_from_slice(cuts);
    edges.push(width_sd);
    let gl = legendre_rule(order);
    let mut out = Vec::with_capacity(gl.len() * (edges.len() - 1));
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &(x, w) in gl.iter() {
            let z = mid + half * x;
            out.push((z, w * half * normal_pdf(z)));
        }
    }
    out
}
