//! Polynomial expansions `a_α = Σ_n a_{α,n}` with `a_{α,0}(t,·)` constant in space.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::field::CoefficientField;
use crate::algebra::{MultiIndex, Polynomial};
use crate::error::{ensure_dim, Error, Result};
use crate::gaussian::{hermite_inner_products, hermite_polynomial, integrate_interval, whitening};

type PathFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// Moving expansion point for the time-dependent Taylor scheme.
#[derive(Clone)]
pub enum CenterPath {
    Function(Arc<PathFn>),
    /// `x̄(s) = x_0 + ∫_{t_0}^s m(u, x_0) du`: the order-zero mean with the drift
    /// frozen at the starting point (a single Picard pass).
    OrderZeroMean { start: Vec<f64>, t0: f64 },
}

impl CenterPath {
    pub fn function<F: Fn(f64) -> Vec<f64> + Send + Sync + 'static>(f: F) -> Self {
        CenterPath::Function(Arc::new(f))
    }
}

impl fmt::Debug for CenterPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterPath::Function(_) => write!(f, "Function(..)"),
            CenterPath::OrderZeroMean { start, t0 } => write!(f, "OrderZeroMean({start:?}, t0={t0})"),
        }
    }
}

/// The four expansion families.
#[derive(Clone, Debug)]
pub enum ExpansionScheme {
    /// `a_{α,n}(t,x) = Σ_{|β|=n} D^β a_α(t,x̄)/β! (x−x̄)^β`
    Taylor { center: Vec<f64> },
    /// Taylor orders `1+M_{n−1} ..= M_n` grouped into the `n`-th term;
    /// `groups = [M_1, .., M_N]`, non-decreasing, with `M_0 = 0`.
    EnhancedTaylor { center: Vec<f64>, groups: Vec<u32> },
    /// Taylor expansion about a time-dependent point `x̄(t)`.
    TimeTaylor { path: CenterPath },
    /// Projection on Hermite polynomials orthonormal for `N(x̄, weight)`.
    Hermite { center: Vec<f64>, weight: DMatrix<f64> },
}

/// Order-by-order coefficient polynomials at a fixed time, in the centred
/// variable `x − center`.
#[derive(Clone, Debug)]
pub struct CentredExpansion {
    pub center: Vec<f64>,
    /// `terms[n][α] = a_{α,n}(t, center + ·)`; zero polynomials are omitted.
    pub terms: Vec<BTreeMap<MultiIndex, Polynomial<f64>>>,
}

impl ExpansionScheme {
    pub fn taylor(center: Vec<f64>) -> Self {
        ExpansionScheme::Taylor { center }
    }

    pub fn hermite_unit(center: Vec<f64>) -> Self {
        let d = center.len();
        ExpansionScheme::Hermite {
            center,
            weight: DMatrix::identity(d, d),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExpansionScheme::Taylor { .. } => "taylor",
            ExpansionScheme::EnhancedTaylor { .. } => "enhanced_taylor",
            ExpansionScheme::TimeTaylor { .. } => "time_taylor",
            ExpansionScheme::Hermite { .. } => "hermite",
        }
    }

    /// Expansion point at time `s`.
    pub fn center(&self, field: &CoefficientField, s: f64) -> Vec<f64> {
        match self {
            ExpansionScheme::Taylor { center }
            | ExpansionScheme::EnhancedTaylor { center, .. }
            | ExpansionScheme::Hermite { center, .. } => center.clone(),
            ExpansionScheme::TimeTaylor { path } => match path {
                CenterPath::Function(f) => f(s),
                CenterPath::OrderZeroMean { start, t0 } => {
                    let d = start.len();
                    (0..d)
                        .map(|i| {
                            let ei = MultiIndex::unit(d, i);
                            start[i] + integrate_interval(16, *t0, s, |u| field.value(&ei, u, start))
                        })
                        .collect()
                }
            },
        }
    }

    /// The same scheme expanded about `x` at time `t` (diagonal freezing).
    pub fn recentered(&self, x: &[f64], t: f64) -> Self {
        match self {
            ExpansionScheme::Taylor { .. } => ExpansionScheme::Taylor { center: x.to_vec() },
            ExpansionScheme::EnhancedTaylor { groups, .. } => ExpansionScheme::EnhancedTaylor {
                center: x.to_vec(),
                groups: groups.clone(),
            },
            ExpansionScheme::Hermite { weight, .. } => ExpansionScheme::Hermite {
                center: x.to_vec(),
                weight: weight.clone(),
            },
            ExpansionScheme::TimeTaylor { path } => {
                let path = match path {
                    CenterPath::OrderZeroMean { .. } => CenterPath::OrderZeroMean {
                        start: x.to_vec(),
                        t0: t,
                    },
                    CenterPath::Function(f) => {
                        let base = f(t);
                        let shift: Vec<f64> = x.iter().zip(&base).map(|(a, b)| a - b).collect();
                        let f = f.clone();
                        CenterPath::function(move |s| {
                            f(s).iter().zip(&shift).map(|(a, b)| a + b).collect()
                        })
                    }
                };
                ExpansionScheme::TimeTaylor { path }
            }
        }
    }

    /// Whether `a_{α,n}(s,·)` is independent of `s`.
    pub fn is_time_homogeneous(&self, field: &CoefficientField) -> bool {
        field.is_time_homogeneous() && !matches!(self, ExpansionScheme::TimeTaylor { .. })
    }

    /// Highest coefficient derivative needed for an expansion of order `n_max`.
    pub fn required_derivative_order(&self, n_max: usize) -> u32 {
        match self {
            ExpansionScheme::Taylor { .. } | ExpansionScheme::TimeTaylor { .. } => n_max as u32,
            ExpansionScheme::EnhancedTaylor { groups, .. } => {
                if n_max == 0 {
                    0
                } else {
                    groups.get(n_max - 1).copied().unwrap_or(u32::MAX)
                }
            }
            ExpansionScheme::Hermite { .. } => 0,
        }
    }

    /// Checks the scheme against the field for expansions up to order `n_max`.
    pub fn validate(&self, field: &CoefficientField, n_max: usize) -> Result<()> {
        let d = field.dim();
        match self {
            ExpansionScheme::Taylor { center } => ensure_dim(d, center.len())?,
            ExpansionScheme::EnhancedTaylor { center, groups } => {
                ensure_dim(d, center.len())?;
                if groups.len() < n_max {
                    return Err(Error::InvalidInput(format!(
                        "enhanced Taylor needs {n_max} groups, got {}",
                        groups.len()
                    )));
                }
                let mut prev = 0;
                for &m in groups {
                    if m < prev {
                        return Err(Error::InvalidInput(format!(
                            "enhanced Taylor groups must be non-decreasing: {groups:?}"
                        )));
                    }
                    prev = m;
                }
            }
            ExpansionScheme::TimeTaylor { path } => {
                if let CenterPath::OrderZeroMean { start, .. } = path {
                    ensure_dim(d, start.len())?;
                }
            }
            ExpansionScheme::Hermite { center, weight } => {
                ensure_dim(d, center.len())?;
                ensure_dim(d, weight.nrows())?;
                ensure_dim(d, weight.ncols())?;
            }
        }
        if !matches!(self, ExpansionScheme::Hermite { .. }) {
            field.require_order(self.required_derivative_order(n_max))?;
        }
        Ok(())
    }

    /// `a_{α,n}(s,·)` for `n = 0..=n_max`, centred at [`Self::center`].
    pub fn centred_expansion(&self, field: &CoefficientField, n_max: usize, s: f64) -> Result<CentredExpansion> {
        self.validate(field, n_max)?;
        let d = field.dim();
        let center = self.center(field, s);
        ensure_dim(d, center.len())?;
        let mut terms = vec![BTreeMap::new(); n_max + 1];
        match self {
            ExpansionScheme::Taylor { .. } | ExpansionScheme::TimeTaylor { .. } => {
                for alpha in field.terms() {
                    for (n, slot) in terms.iter_mut().enumerate() {
                        let p = taylor_block(field, alpha, s, &center, n as u32, n as u32)?;
                        insert_nonzero(slot, alpha, p);
                    }
                }
            }
            ExpansionScheme::EnhancedTaylor { groups, .. } => {
                for alpha in field.terms() {
                    let p = taylor_block(field, alpha, s, &center, 0, 0)?;
                    insert_nonzero(&mut terms[0], alpha, p);
                    let mut lower = 0;
                    for n in 1..=n_max {
                        let upper = groups[n - 1];
                        let p = taylor_block(field, alpha, s, &center, lower + 1, upper)?;
                        insert_nonzero(&mut terms[n], alpha, p);
                        lower = upper;
                    }
                }
            }
            ExpansionScheme::Hermite { weight, .. } => {
                let (_, inv) = whitening(weight)?;
                let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| inv[(i, j)]).collect()).collect();
                let origin = vec![0.0; d];
                let mut basis: BTreeMap<MultiIndex, Polynomial<f64>> = BTreeMap::new();
                for alpha in field.terms() {
                    let coeffs = hermite_inner_products(
                        |x| field.value(alpha, s, x),
                        &center,
                        weight,
                        n_max as u32,
                    )?;
                    for (beta, c) in coeffs {
                        if c == 0.0 {
                            continue;
                        }
                        let h = match basis.get(&beta) {
                            Some(h) => h.clone(),
                            None => {
                                let h = hermite_polynomial(&beta).substitute_linear(&rows, &origin)?;
                                basis.insert(beta.clone(), h.clone());
                                h
                            }
                        };
                        let n = beta.order() as usize;
                        let entry = terms[n]
                            .entry(alpha.clone())
                            .or_insert_with(|| Polynomial::zero(d));
                        *entry = entry.add(&h.scale(&c))?;
                    }
                }
                for slot in &mut terms {
                    slot.retain(|_, p| !p.is_zero());
                }
            }
        }
        Ok(CentredExpansion { center, terms })
    }

    /// `a_{α,n}(s,·)` as polynomials in the absolute variable `x`.
    pub fn polynomials(&self, field: &CoefficientField, n: usize, s: f64) -> Result<BTreeMap<MultiIndex, Polynomial<f64>>> {
        let exp = self.centred_expansion(field, n, s)?;
        let mut out = BTreeMap::new();
        for (alpha, p) in exp.terms.into_iter().nth(n).expect("n_max = n") {
            out.insert(alpha, p.substitute_affine(&exp.center)?);
        }
        Ok(out)
    }
}

fn insert_nonzero(slot: &mut BTreeMap<MultiIndex, Polynomial<f64>>, alpha: &MultiIndex, p: Polynomial<f64>) {
    if !p.is_zero() {
        slot.insert(alpha.clone(), p);
    }
}

/// `Σ_{lo ≤ |β| ≤ hi} D^β a_α(s,x̄)/β! z^β`
fn taylor_block(
    field: &CoefficientField,
    alpha: &MultiIndex,
    s: f64,
    center: &[f64],
    lo: u32,
    hi: u32,
) -> Result<Polynomial<f64>> {
    let d = field.dim();
    let mut out = Polynomial::zero(d);
    for order in lo..=hi {
        for beta in MultiIndex::all_of_order(d, order) {
            let c = field.derivative(alpha, &beta, s, center)? / beta.factorial();
            if c != 0.0 {
                out = out.add(&Polynomial::monomial(beta, c))?;
            }
        }
    }
    Ok(out)
}
