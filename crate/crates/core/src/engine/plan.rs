use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use super::operators::{
    adjoint_dilation_operators, dilation_operators, g_bar_operator, g_operator, l_operator_exact,
};
use crate::algebra::{MultiIndex, Polynomial, WeylOperator};
use crate::basis::{CentredExpansion, CoefficientField, ExpansionScheme};
use crate::error::{ensure_dim, Error, Result};
use crate::gaussian::{apply_weyl_to_kernel, legendre_rule, GaussianKernel, PolyGaussian, Quadrature};
use crate::payoff::Payoff;

/// Where the coefficient expansion is centred.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrozenPoint {
    /// The scheme's own center.
    Fixed,
    /// `x̄ = x`: the expansion is rebuilt at every evaluation point.
    Diagonal,
}

/// How the iterated time integrals in `L_n` are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeIntegration {
    /// Symbolic simplex integration; requires time-homogeneous coefficients.
    ExactTimeHomogeneous,
    /// Nested Gauss–Legendre with `order` nodes per level.
    Quadrature { order: usize },
}

/// Default nodes per level for nested time quadrature.
pub const DEFAULT_TIME_QUADRATURE: usize = 8;
/// Default relative pruning threshold for `L_n` terms.
pub const DEFAULT_PRUNE: f64 = 1e-14;
/// Gauss–Legendre order for the time integrals of `m`, `C` and `γ`.
const KERNEL_TIME_ORDER: usize = 16;

/// Everything needed to evaluate `ū_N` and `Γ̄_N`.
#[derive(Clone, Debug)]
pub struct ExpansionPlan {
    field: CoefficientField,
    scheme: ExpansionScheme,
    order: usize,
    frozen: FrozenPoint,
    time_integration: TimeIntegration,
    payoff_quadrature: Option<Quadrature>,
    prune: f64,
    cache: Option<Arc<ExpansionCache>>,
}

impl ExpansionPlan {
    /// Diagonal freezing, exact time integration when the model allows it and
    /// nested quadrature otherwise.
    pub fn new(field: CoefficientField, scheme: ExpansionScheme, order: usize) -> Result<Self> {
        scheme.validate(&field, order)?;
        let time_integration = if scheme.is_time_homogeneous(&field) {
            TimeIntegration::ExactTimeHomogeneous
        } else {
            TimeIntegration::Quadrature {
                order: DEFAULT_TIME_QUADRATURE,
            }
        };
        Ok(ExpansionPlan {
            field,
            scheme,
            order,
            frozen: FrozenPoint::Diagonal,
            time_integration,
            payoff_quadrature: None,
            prune: DEFAULT_PRUNE,
            cache: None,
        })
    }

    pub fn with_frozen_point(mut self, frozen: FrozenPoint) -> Self {
        self.frozen = frozen;
        self
    }

    pub fn with_time_integration(mut self, time_integration: TimeIntegration) -> Result<Self> {
        match time_integration {
            TimeIntegration::ExactTimeHomogeneous if !self.scheme.is_time_homogeneous(&self.field) => {
                return Err(Error::InvalidInput(
                    "exact time integration needs time-homogeneous coefficients; use quadrature".into(),
                ))
            }
            TimeIntegration::Quadrature { order: 0 } => {
                return Err(Error::InvalidInput("time quadrature order must be positive".into()))
            }
            _ => {}
        }
        self.time_integration = time_integration;
        Ok(self)
    }

    /// Overrides the payoff quadrature; by default smooth payoffs use
    /// [`Quadrature::SMOOTH`] and payoffs with kinks use kink-split panels.
    pub fn with_payoff_quadrature(mut self, quadrature: Quadrature) -> Result<Self> {
        quadrature.validate()?;
        self.payoff_quadrature = Some(quadrature);
        Ok(self)
    }

    pub fn with_prune(mut self, relative: f64) -> Self {
        self.prune = relative;
        self
    }

    /// Memoises local expansions by `(t, T, x̄)`, for grid workloads.
    pub fn with_cache(mut self) -> Self {
        self.cache = Some(Arc::new(ExpansionCache::default()));
        self
    }

    /// Same plan with a different order `N`.
    pub fn with_order(&self, order: usize) -> Result<Self> {
        self.scheme.validate(&self.field, order)?;
        let mut out = self.clone();
        out.order = order;
        if out.cache.is_some() {
            out.cache = Some(Arc::new(ExpansionCache::default()));
        }
        Ok(out)
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn scheme(&self) -> &ExpansionScheme {
        &self.scheme
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn frozen_point(&self) -> FrozenPoint {
        self.frozen
    }

    pub fn time_integration(&self) -> TimeIntegration {
        self.time_integration
    }

    pub fn is_time_homogeneous(&self) -> bool {
        self.scheme.is_time_homogeneous(&self.field)
    }

    /// Quadrature used against `payoff`.
    pub fn quadrature_for(&self, payoff: &Payoff) -> Quadrature {
        self.payoff_quadrature.unwrap_or_else(|| default_quadrature(payoff))
    }

    /// The scheme used for an evaluation at `(t, x)`.
    pub fn scheme_at(&self, t: f64, x: &[f64]) -> ExpansionScheme {
        match self.frozen {
            FrozenPoint::Fixed => self.scheme.clone(),
            FrozenPoint::Diagonal => self.scheme.recentered(x, t),
        }
    }

    fn check_times(t: f64, maturity: f64) -> Result<()> {
        if t < maturity && t.is_finite() && maturity.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("need t < T, got t = {t}, T = {maturity}")))
        }
    }

    /// `G_n` with symbolic time `τ_j = s_j − t`, expanded for evaluation at `x`.
    pub fn build_g(&self, n: usize, t: f64, x: &[f64], time_var: usize) -> Result<WeylOperator> {
        self.require_exact()?;
        if n == 0 || n > self.order {
            return Err(Error::InvalidInput(format!("G_n needs 1 ≤ n ≤ N = {}, got {n}", self.order)));
        }
        let (exp, rates) = self.homogeneous_expansion(t, x)?;
        let dil = dilation_operators(&rates.mean, &rates.cov, Some(time_var));
        g_operator(&exp.terms[n], &dil)
    }

    /// `L_n(t,T)` in the local coordinate `x − x̄`, for evaluation at `x`.
    pub fn build_l(&self, n: usize, t: f64, x: &[f64], maturity: f64) -> Result<WeylOperator> {
        if n == 0 || n > self.order {
            return Err(Error::InvalidInput(format!("L_n needs 1 ≤ n ≤ N = {}, got {n}", self.order)));
        }
        Ok(self.local_expansion(t, x, maturity)?.correctors[n - 1].clone())
    }

    /// Numeric `G^x_n(t,s)` and its adjoint `Ḡ^y_n(s,T)`, both in coordinates
    /// relative to the returned expansion point.
    pub fn generator_pair(
        &self,
        n: usize,
        t: f64,
        s: f64,
        maturity: f64,
        x: &[f64],
    ) -> Result<(WeylOperator, WeylOperator, Vec<f64>)> {
        self.require_exact()?;
        if n == 0 || n > self.order {
            return Err(Error::InvalidInput(format!("G_n needs 1 ≤ n ≤ N = {}, got {n}", self.order)));
        }
        if !(t <= s && s <= maturity) {
            return Err(Error::InvalidInput(format!("need t ≤ s ≤ T, got {t}, {s}, {maturity}")));
        }
        let (exp, rates) = self.homogeneous_expansion(t, x)?;
        let forward = dilation_operators(
            &rates.mean.iter().map(|m| m * (s - t)).collect::<Vec<_>>(),
            &(&rates.cov * (s - t)),
            None,
        );
        let backward = adjoint_dilation_operators(
            &rates.mean.iter().map(|m| m * (maturity - s)).collect::<Vec<_>>(),
            &(&rates.cov * (maturity - s)),
        );
        let g = g_operator(&exp.terms[n], &forward)?;
        let g_bar = g_bar_operator(&exp.terms[n], &backward)?;
        Ok((g, g_bar, exp.center))
    }

    fn require_exact(&self) -> Result<()> {
        if self.time_integration == TimeIntegration::ExactTimeHomogeneous {
            Ok(())
        } else {
            Err(Error::InvalidInput("symbolic G_n is only built in exact time-integration mode".into()))
        }
    }

    fn homogeneous_expansion(&self, t: f64, x: &[f64]) -> Result<(CentredExpansion, Rates)> {
        ensure_dim(self.field.dim(), x.len())?;
        let exp = self.scheme_at(t, x).centred_expansion(&self.field, self.order, t)?;
        let rates = Rates::from_order_zero(self.field.dim(), &exp.terms[0]);
        Ok((exp, rates))
    }

    /// Kernel and correctors `L_1..L_N` for evaluation at `x`.
    pub fn local_expansion(&self, t: f64, x: &[f64], maturity: f64) -> Result<Arc<LocalExpansion>> {
        Self::check_times(t, maturity)?;
        ensure_dim(self.field.dim(), x.len())?;
        let origin = self.scheme_at(t, x).center(&self.field, t);
        if let Some(cache) = &self.cache {
            let key = CacheKey::new(t, maturity, &origin);
            if let Some(hit) = cache.get(&key) {
                return Ok(hit);
            }
            let built = Arc::new(self.build_local(t, x, maturity)?);
            cache.insert(key, built.clone());
            return Ok(built);
        }
        Ok(Arc::new(self.build_local(t, x, maturity)?))
    }

    fn build_local(&self, t: f64, x: &[f64], maturity: f64) -> Result<LocalExpansion> {
        match self.time_integration {
            TimeIntegration::ExactTimeHomogeneous => self.build_local_exact(t, x, maturity),
            TimeIntegration::Quadrature { order } => self.build_local_quadrature(t, x, maturity, order),
        }
    }

    fn build_local_exact(&self, t: f64, x: &[f64], maturity: f64) -> Result<LocalExpansion> {
        let (exp, rates) = self.homogeneous_expansion(t, x)?;
        let v = maturity - t;
        let mean: Vec<f64> = rates.mean.iter().map(|m| m * v).collect();
        let kernel = GaussianKernel::new(t, maturity, mean, &rates.cov * v, rates.killing * v)?;
        let mut dilations: HashMap<usize, Vec<WeylOperator>> = HashMap::new();
        let correctors = (1..=self.order)
            .map(|n| {
                l_operator_exact(n, v, self.prune, |k, j| {
                    let dil = dilations
                        .entry(j)
                        .or_insert_with(|| dilation_operators(&rates.mean, &rates.cov, Some(j)));
                    g_operator(&exp.terms[k], dil)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalExpansion {
            origin: exp.center,
            kernel,
            correctors,
        })
    }

    fn build_local_quadrature(&self, t: f64, x: &[f64], maturity: f64, order: usize) -> Result<LocalExpansion> {
        let scheme = self.scheme_at(t, x);
        let mut builder = QuadratureBuilder {
            field: &self.field,
            scheme: &scheme,
            order: self.order,
            t,
            maturity,
            origin: scheme.center(&self.field, t),
            nodes: order,
            expansions: HashMap::new(),
            generators: HashMap::new(),
        };
        let (mean, cov, killing) = builder.integrated_rates(maturity)?;
        let kernel = GaussianKernel::new(t, maturity, mean, cov, killing)?;
        let correctors = (1..=self.order)
            .map(|n| Ok(builder.nested(n, t)?.prune_relative(self.prune)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalExpansion {
            origin: builder.origin,
            kernel,
            correctors,
        })
    }

    /// `Γ̄_N(t,x;T,y)`, including the killing factor.
    pub fn fundamental_solution(&self, t: f64, x: &[f64], maturity: f64, y: &[f64]) -> Result<f64> {
        ensure_dim(self.field.dim(), y.len())?;
        self.local_expansion(t, x, maturity)?.fundamental_solution(x, y)
    }

    /// `ū_N(t,x)` with the per-order terms `u_0..u_N`.
    pub fn solve(&self, payoff: &Payoff, t: f64, x: &[f64], maturity: f64) -> Result<Solution> {
        let local = self.local_expansion(t, x, maturity)?;
        let quad = self.quadrature_for(payoff);
        let factor = local.kernel.killing_factor();
        let terms = local
            .terms(x)?
            .iter()
            .map(|pg| Ok(factor * pg.integrate_against(payoff, quad)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Solution {
            value: terms.iter().sum(),
            terms,
        })
    }
}

/// Kink-aware default quadrature for a payoff.
pub fn default_quadrature(payoff: &Payoff) -> Quadrature {
    if payoff.is_smooth() {
        Quadrature::SMOOTH
    } else {
        Quadrature::KinkSplit {
            order: 60,
            width_sd: 12.0,
        }
    }
}

/// `ū_N = Σ u_n` and its terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub value: f64,
    /// `terms[n] = u_n`.
    pub terms: Vec<f64>,
}

/// Leading kernel and the correctors `L_1..L_N` at one frozen point.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    /// Expansion point `x̄`; operators act on `x − x̄`.
    pub origin: Vec<f64>,
    pub kernel: GaussianKernel,
    /// `correctors[n−1] = L_n`, time-free.
    pub correctors: Vec<WeylOperator>,
}

impl LocalExpansion {
    /// `[Γ_0, L_1Γ_0, …, L_NΓ_0]` at the starting point `x`, without the killing factor.
    pub fn terms(&self, x: &[f64]) -> Result<Vec<PolyGaussian>> {
        let mut out = vec![PolyGaussian::kernel_only(self.kernel.clone(), x)?];
        for op in &self.correctors {
            out.push(apply_weyl_to_kernel(op, &self.kernel, x, &self.origin)?);
        }
        Ok(out)
    }

    /// `(1 + Σ L_n)Γ_0` as a single poly-Gaussian, without the killing factor.
    pub fn density(&self, x: &[f64]) -> Result<PolyGaussian> {
        let terms = self.terms(x)?;
        let mut acc = terms[0].clone();
        for pg in &terms[1..] {
            acc = acc.add(pg)?;
        }
        Ok(acc)
    }

    pub fn fundamental_solution(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.kernel.killing_factor() * self.density(x)?.evaluate(y))
    }
}

/// Thread-safe memo of local expansions.
#[derive(Debug, Default)]
pub struct ExpansionCache {
    map: Mutex<HashMap<CacheKey, Arc<LocalExpansion>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey(Vec<u64>);

impl CacheKey {
    fn new(t: f64, maturity: f64, origin: &[f64]) -> Self {
        let mut bits = vec![t.to_bits(), maturity.to_bits()];
        bits.extend(origin.iter().map(|v| v.to_bits()));
        CacheKey(bits)
    }
}

impl ExpansionCache {
    fn get(&self, key: &CacheKey) -> Option<Arc<LocalExpansion>> {
        self.map.lock().expect("cache poisoned").get(key).cloned()
    }

    fn insert(&self, key: CacheKey, value: Arc<LocalExpansion>) {
        self.map.lock().expect("cache poisoned").insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Order-zero rates `m`, `C` and `γ`.
#[derive(Clone, Debug)]
pub(crate) struct Rates {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub killing: f64,
}

impl Rates {
    pub(crate) fn from_order_zero(d: usize, a0: &BTreeMap<MultiIndex, Polynomial<f64>>) -> Self {
        let zero = MultiIndex::zeros(d);
        let value = |alpha: &MultiIndex| a0.get(alpha).map_or(0.0, |p| p.coefficient(&zero));
        let mut cov = DMatrix::zeros(d, d);
        let mut mean = vec![0.0; d];
        for i in 0..d {
            let ei = MultiIndex::unit(d, i);
            mean[i] = value(&ei);
            cov[(i, i)] = 2.0 * value(&ei.add(&ei));
            for j in 0..i {
                let v = value(&ei.add(&MultiIndex::unit(d, j)));
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        Rates {
            mean,
            cov,
            killing: value(&zero),
        }
    }
}

struct QuadratureBuilder<'a> {
    field: &'a CoefficientField,
    scheme: &'a ExpansionScheme,
    order: usize,
    t: f64,
    maturity: f64,
    origin: Vec<f64>,
    nodes: usize,
    expansions: HashMap<u64, Arc<Vec<BTreeMap<MultiIndex, Polynomial<f64>>>>>,
    generators: HashMap<u64, Arc<Vec<WeylOperator>>>,
}

impl QuadratureBuilder<'_> {
    /// `a_{α,n}(s,·)` in the coordinate `x − origin`, for `n = 0..=N`.
    fn expansion(&mut self, s: f64) -> Result<Arc<Vec<BTreeMap<MultiIndex, Polynomial<f64>>>>> {
        if let Some(e) = self.expansions.get(&s.to_bits()) {
            return Ok(e.clone());
        }
        let exp = self.scheme.centred_expansion(self.field, self.order, s)?;
        let shift: Vec<f64> = exp.center.iter().zip(&self.origin).map(|(c, o)| c - o).collect();
        let moved = shift.iter().any(|v| *v != 0.0);
        let terms = exp
            .terms
            .into_iter()
            .map(|level| {
                level
                    .into_iter()
                    .map(|(a, p)| Ok((a, if moved { p.substitute_affine(&shift)? } else { p })))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let terms = Arc::new(terms);
        self.expansions.insert(s.to_bits(), terms.clone());
        Ok(terms)
    }

    /// `(m(t,s), C(t,s), ∫_t^s γ)` by Gauss–Legendre.
    fn integrated_rates(&mut self, s: f64) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
        let d = self.field.dim();
        let rule = legendre_rule(KERNEL_TIME_ORDER);
        let half = 0.5 * (s - self.t);
        let mid = 0.5 * (s + self.t);
        let mut mean = vec![0.0; d];
        let mut cov = DMatrix::zeros(d, d);
        let mut killing = 0.0;
        for &(node, w) in rule.iter() {
            let u = mid + half * node;
            let exp = self.expansion(u)?;
            let r = Rates::from_order_zero(d, &exp[0]);
            for i in 0..d {
                mean[i] += w * half * r.mean[i];
            }
            cov += r.cov * (w * half);
            killing += w * half * r.killing;
        }
        Ok((mean, cov, killing))
    }

    /// `[G_1(t,s), …, G_N(t,s)]` at a numeric time `s`.
    fn generators(&mut self, s: f64) -> Result<Arc<Vec<WeylOperator>>> {
        if let Some(g) = self.generators.get(&s.to_bits()) {
            return Ok(g.clone());
        }
        let exp = self.expansion(s)?;
        let (mean, cov, _) = self.integrated_rates(s)?;
        let dil = dilation_operators(&mean, &cov, None);
        let gens = (1..=self.order)
            .map(|k| g_operator(&exp[k], &dil))
            .collect::<Result<Vec<_>>>()?;
        let gens = Arc::new(gens);
        self.generators.insert(s.to_bits(), gens.clone());
        Ok(gens)
    }

    /// `Σ_{i=1}^{n} ∫_{s_prev}^T G_i(s) ∘ R_{n−i}(s) ds` with `R_0 = 1`.
    fn nested(&mut self, n: usize, s_prev: f64) -> Result<WeylOperator> {
        let d = self.field.dim();
        let rule = legendre_rule(self.nodes);
        let half = 0.5 * (self.maturity - s_prev);
        let mid = 0.5 * (self.maturity + s_prev);
        let mut out = WeylOperator::zero(d);
        for &(node, w) in rule.iter() {
            let s = mid + half * node;
            let gens = self.generators(s)?;
            for i in 1..=n {
                let g = &gens[i - 1];
                let term = if i == n { g.clone() } else { g.compose(&self.nested(n - i, s)?)? };
                out.add_assign(&term.scale(&(w * half)))?;
            }
        }
        Ok(out)
    }
}
