//! Normal-ordered differential operators `Σ c · x^β D^α` whose scalar
//! coefficients may carry monomials in symbolic time increments `τ_j = s_j − t`.
//!
//! A term `x^β D^α` acts on `f` as `x^β · (D^α f)`: multiplications on the left,
//! derivatives on the right. Composition restores this order with the
//! commutation rule `D_i x_j = x_j D_i + δ_ij`.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;

use super::multi_index::{binomial, falling, MultiIndex};
use super::polynomial::Polynomial;
use super::scalar::Scalar;
use crate::error::{ensure_dim, Error, Result};

/// Exponents `k_j` of `∏_j (s_j − t)^{k_j}`; position 0 holds time variable 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimePowers(SmallVec<[u32; 4]>);

impl TimePowers {
    pub fn none() -> Self {
        TimePowers(SmallVec::new())
    }

    /// `(s_var − t)^power`, with `var` counted from 1.
    pub fn single(var: usize, power: u32) -> Self {
        assert!(var >= 1, "time variables are numbered from 1");
        let mut v = SmallVec::from_elem(0, var);
        v[var - 1] = power;
        TimePowers(v).trimmed()
    }

    pub fn from_powers<I: IntoIterator<Item = u32>>(powers: I) -> Self {
        TimePowers(powers.into_iter().collect()).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
        self
    }

    /// Exponent of time variable `var` (1-based).
    pub fn power(&self, var: usize) -> u32 {
        self.0.get(var - 1).copied().unwrap_or(0)
    }

    /// Highest time variable carrying a non-zero exponent, 0 if none.
    pub fn max_var(&self) -> usize {
        self.0.len()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &TimePowers) -> TimePowers {
        let n = self.0.len().max(other.0.len());
        TimePowers(
            (0..n)
                .map(|i| self.0.get(i).unwrap_or(&0) + other.0.get(i).unwrap_or(&0))
                .collect(),
        )
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Debug for TimePowers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ{:?}", self.0.as_slice())
    }
}

/// `c · ∏_j (s_j − t)^{k_j}`
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMonomial<S: Scalar = f64> {
    pub coefficient: S,
    pub powers: TimePowers,
}

impl<S: Scalar> TimeMonomial<S> {
    pub fn new(coefficient: S, powers: TimePowers) -> Self {
        TimeMonomial { coefficient, powers }
    }

    pub fn constant(coefficient: S) -> Self {
        Self::new(coefficient, TimePowers::none())
    }

    pub fn mul(&self, other: &Self) -> Self {
        TimeMonomial {
            coefficient: self.coefficient.clone() * other.coefficient.clone(),
            powers: self.powers.mul(&other.powers),
        }
    }

    /// Integral over the ordered simplex `t < s_1 < ⋯ < s_h < T`, with `horizon = T − t`.
    pub fn integrate_simplex(&self, h: usize, horizon: &S) -> Result<S> {
        Ok(self.coefficient.clone() * simplex_monomial_integral(&self.powers, h, horizon)?)
    }
}

/// `∫_{t<s_1<⋯<s_h<T} ∏_j (s_j − t)^{k_j} ds`, evaluated by the recursion
/// `J_1(v) = v^{k_1+1}/(k_1+1)`, `J_j(v) = ∫_0^v u^{k_j} J_{j−1}(u) du`, which
/// closes to `v^{K_h+h} / ∏_j (K_j + j)` with partial sums `K_j = k_1 + ⋯ + k_j`.
pub fn simplex_monomial_integral<S: Scalar>(powers: &TimePowers, h: usize, horizon: &S) -> Result<S> {
    if powers.max_var() > h {
        return Err(Error::InvalidInput(format!(
            "time variable s_{} referenced but only {h} variables are integrated",
            powers.max_var()
        )));
    }
    let mut partial: u32 = 0;
    let mut denom = S::one();
    for j in 1..=h {
        partial += powers.power(j);
        denom = denom * S::from_integer((partial as usize + j) as i64);
    }
    Ok(horizon.pow(partial + h as u32) / denom)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct WeylKey {
    /// `β`: multiplication part `x^β`.
    pub mult: MultiIndex,
    /// `α`: derivative part `D^α`.
    pub deriv: MultiIndex,
    pub time: TimePowers,
}

/// Element of the Weyl algebra in `d` variables, in normal form.
#[derive(Clone, PartialEq)]
pub struct WeylOperator<S: Scalar = f64> {
    dim: usize,
    terms: BTreeMap<WeylKey, S>,
}

impl<S: Scalar> WeylOperator<S> {
    pub fn zero(dim: usize) -> Self {
        WeylOperator {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, S::one())
    }

    pub fn scalar(dim: usize, c: S) -> Self {
        Self::term(MultiIndex::zeros(dim), MultiIndex::zeros(dim), TimeMonomial::constant(c))
    }

    /// Single term `c·τ^k · x^β D^α`.
    pub fn term(mult: MultiIndex, deriv: MultiIndex, scalar: TimeMonomial<S>) -> Self {
        assert_eq!(mult.dim(), deriv.dim(), "multi-index dimensions differ");
        let mut op = Self::zero(mult.dim());
        op.add_term(
            WeylKey {
                mult,
                deriv,
                time: scalar.powers,
            },
            scalar.coefficient,
        );
        op
    }

    /// Multiplication by `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::term(MultiIndex::unit(dim, i), MultiIndex::zeros(dim), TimeMonomial::constant(S::one()))
    }

    /// `∂_{x_i}`
    pub fn partial(dim: usize, i: usize) -> Self {
        Self::term(MultiIndex::zeros(dim), MultiIndex::unit(dim, i), TimeMonomial::constant(S::one()))
    }

    /// `D^α`
    pub fn derivative(alpha: MultiIndex) -> Self {
        let dim = alpha.dim();
        Self::term(MultiIndex::zeros(dim), alpha, TimeMonomial::constant(S::one()))
    }

    /// Multiplication by a polynomial.
    pub fn multiplication(p: &Polynomial<S>) -> Self {
        let mut op = Self::zero(p.dim());
        for (e, c) in p.terms() {
            op.add_term(
                WeylKey {
                    mult: e.clone(),
                    deriv: MultiIndex::zeros(p.dim()),
                    time: TimePowers::none(),
                },
                c.clone(),
            );
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WeylKey, &S)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mult: &MultiIndex, deriv: &MultiIndex, time: &TimePowers) -> S {
        self.terms
            .get(&WeylKey {
                mult: mult.clone(),
                deriv: deriv.clone(),
                time: time.clone(),
            })
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// True when no term carries a symbolic time factor.
    pub fn is_time_free(&self) -> bool {
        self.terms.keys().all(|k| k.time.is_constant())
    }

    pub fn max_time_var(&self) -> usize {
        self.terms.keys().map(|k| k.time.max_var()).max().unwrap_or(0)
    }

    pub fn max_derivative_order(&self) -> u32 {
        self.terms.keys().map(|k| k.deriv.order()).max().unwrap_or(0)
    }

    pub fn max_multiplier_order(&self) -> u32 {
        self.terms.keys().map(|k| k.mult.order()).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, key: WeylKey, c: S) {
        if c.is_negligible() {
            return;
        }
        match self.terms.remove(&key) {
            Some(prev) => {
                let sum = prev + c;
                if !sum.is_negligible() {
                    self.terms.insert(key, sum);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        ensure_dim(self.dim, other.dim)?;
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
        Ok(())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.clone() * c.clone());
        }
        out
    }

    /// Multiplies every coefficient by the time monomial `(s_var − t)^power`.
    pub fn times_time_power(&self, var: usize, power: u32) -> Self {
        let factor = TimePowers::single(var, power);
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.terms {
            out.add_term(
                WeylKey {
                    mult: k.mult.clone(),
                    deriv: k.deriv.clone(),
                    time: k.time.mul(&factor),
                },
                v.clone(),
            );
        }
        out
    }

    /// `self ∘ other`: apply `other` first, then `self`; result in normal form.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let time = ka.time.mul(&kb.time);
                let base = ca.clone() * cb.clone();
                // D^{α_a} x^{β_b} = Σ_γ Π_i C(α_a,i; γ_i) · β_b,i^{(γ_i)} x^{β_b−γ} D^{α_a−γ}
                let overlap = MultiIndex::new(
                    ka.deriv.iter().zip(kb.mult.iter()).map(|(a, b)| a.min(b)),
                );
                for gamma in overlap.sub_indices() {
                    let factor: i64 = (0..self.dim)
                        .map(|i| {
                            let g = gamma.get(i);
                            binomial(ka.deriv.get(i), g) * falling(kb.mult.get(i), g)
                        })
                        .product();
                    let mult = ka
                        .mult
                        .add(&kb.mult.checked_sub(&gamma).expect("γ ≤ β_b"));
                    let deriv = ka
                        .deriv
                        .checked_sub(&gamma)
                        .expect("γ ≤ α_a")
                        .add(&kb.deriv);
                    out.add_term(
                        WeylKey {
                            mult,
                            deriv,
                            time: time.clone(),
                        },
                        base.clone() * S::from_integer(factor),
                    );
                }
            }
        }
        Ok(out)
    }

    /// Integrates every time monomial over the ordered simplex
    /// `t < s_1 < ⋯ < s_h < T` (`horizon = T − t`). The result is time-free.
    pub fn simplex_integrate(&self, h: usize, horizon: &S) -> Result<Self> {
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            let weight = simplex_monomial_integral(&k.time, h, horizon)?;
            out.add_term(
                WeylKey {
                    mult: k.mult.clone(),
                    deriv: k.deriv.clone(),
                    time: TimePowers::none(),
                },
                c.clone() * weight,
            );
        }
        Ok(out)
    }

    /// Substitutes numeric values `τ_j = taus[j−1]` for the time increments.
    pub fn evaluate_time(&self, taus: &[S]) -> Result<Self> {
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            if k.time.max_var() > taus.len() {
                return Err(Error::InvalidInput(format!(
                    "time variable s_{} has no value",
                    k.time.max_var()
                )));
            }
            let mut v = c.clone();
            for (j, tau) in taus.iter().enumerate() {
                let p = k.time.power(j + 1);
                if p > 0 {
                    v = v * tau.pow(p);
                }
            }
            out.add_term(
                WeylKey {
                    mult: k.mult.clone(),
                    deriv: k.deriv.clone(),
                    time: TimePowers::none(),
                },
                v,
            );
        }
        Ok(out)
    }

    /// Applies a time-free operator to a polynomial.
    pub fn apply_to_polynomial(&self, p: &Polynomial<S>) -> Result<Polynomial<S>> {
        ensure_dim(self.dim, p.dim())?;
        if !self.is_time_free() {
            return Err(Error::InvalidInput(
                "operator carries symbolic time factors; integrate or evaluate them first".into(),
            ));
        }
        let mut out = Polynomial::zero(self.dim);
        for (k, c) in &self.terms {
            let dp = p.derivative_multi(&k.deriv)?;
            if dp.is_zero() {
                continue;
            }
            let term = dp.mul(&Polynomial::monomial(k.mult.clone(), c.clone()))?;
            out = out.add(&term)?;
        }
        Ok(out)
    }

    pub fn map_coefficients<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> WeylOperator<T> {
        let mut out = WeylOperator::zero(self.dim);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }
}

impl WeylOperator<f64> {
    /// Drops terms below `rel` times the largest coefficient magnitude.
    pub fn prune_relative(&self, rel: f64) -> Self {
        let max = self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()));
        let cut = max * rel;
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            if c.abs() > cut {
                out.add_term(k.clone(), *c);
            }
        }
        out
    }
}

impl<S: Scalar> fmt::Debug for WeylOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}·{:?}·x^{}·D^{}", k.time, k.mult, k.deriv)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::rational;
    use num_rational::BigRational;

    type Q = BigRational;

    fn x1d() -> WeylOperator<Q> {
        WeylOperator::coordinate(1, 0)
    }

    fn d1d() -> WeylOperator<Q> {
        WeylOperator::partial(1, 0)
    }

    #[test]
    fn canonical_commutation() {
        let lhs = d1d().compose(&x1d()).unwrap();
        let expected = x1d().compose(&d1d()).unwrap().add(&WeylOperator::identity(1)).unwrap();
        assert_eq!(lhs, expected);
        assert_eq!(
            lhs.coefficient(&MultiIndex::from([1]), &MultiIndex::from([1]), &TimePowers::none()),
            rational(1, 1)
        );
    }

    #[test]
    fn identity_is_a_unit() {
        let a = x1d()
            .compose(&d1d())
            .unwrap()
            .add(&d1d().compose(&d1d()).unwrap().times_time_power(2, 1))
            .unwrap();
        let id = WeylOperator::identity(1);
        assert_eq!(a.compose(&id).unwrap(), a);
        assert_eq!(id.compose(&a).unwrap(), a);
    }

    #[test]
    fn euler_operator_squared() {
        let e = x1d().compose(&d1d()).unwrap();
        let sq = e.compose(&e).unwrap();
        let expected = WeylOperator::term(
            MultiIndex::from([2]),
            MultiIndex::from([2]),
            TimeMonomial::constant(rational(1, 1)),
        )
        .add(&e)
        .unwrap();
        assert_eq!(sq, expected);
        // Oracle: (x∂)^2 x^k = k^2 x^k.
        for k in 0..=4u32 {
            let p = Polynomial::<Q>::monomial(MultiIndex::from([k]), rational(1, 1));
            let applied = sq.apply_to_polynomial(&p).unwrap();
            assert_eq!(applied, p.scale(&rational((k * k) as i64, 1)));
        }
    }

    #[test]
    fn simplex_integrals() {
        let v = rational(3, 2);
        let one: WeylOperator<Q> = WeylOperator::identity(1);
        let i2 = one.simplex_integrate(2, &v).unwrap();
        assert_eq!(
            i2.coefficient(&MultiIndex::zeros(1), &MultiIndex::zeros(1), &TimePowers::none()),
            v.pow(2) / rational(2, 1)
        );
        let i1 = one.simplex_integrate(1, &v).unwrap();
        assert_eq!(
            i1.coefficient(&MultiIndex::zeros(1), &MultiIndex::zeros(1), &TimePowers::none()),
            v.clone()
        );
        let tm = TimeMonomial::new(rational(1, 1), TimePowers::from_powers([1, 1]));
        assert_eq!(tm.integrate_simplex(2, &v).unwrap(), v.pow(4) / rational(8, 1));
    }

    #[test]
    fn simplex_integral_matches_nested_quadrature() {
        use gauss_quad::legendre::GaussLegendre;
        let gl = GaussLegendre::new(16.try_into().unwrap());
        let (t, big_t) = (0.3, 1.7);
        // ∫_t^T ds2 ∫_t^{s2} ds1 (s1 - t)(s2 - t)
        let oracle = gl.integrate(t, big_t, |s2| {
            gl.integrate(t, s2, |s1| (s1 - t) * (s2 - t))
        });
        let tm = TimeMonomial::new(1.0, TimePowers::from_powers([1, 1]));
        let exact = tm.integrate_simplex(2, &(big_t - t)).unwrap();
        assert!((oracle - exact).abs() < 1e-12);
        assert!((exact - (big_t - t).powi(4) / 8.0).abs() < 1e-14);
    }

    #[test]
    fn unreferenced_time_variable_rejected() {
        let op: WeylOperator<f64> = WeylOperator::identity(1).times_time_power(3, 1);
        assert!(op.simplex_integrate(2, &1.0).is_err());
        assert!(op.simplex_integrate(3, &1.0).is_ok());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a: WeylOperator<f64> = WeylOperator::identity(1);
        let b: WeylOperator<f64> = WeylOperator::identity(2);
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn time_dependent_operators_cannot_act() {
        let op: WeylOperator<f64> = WeylOperator::partial(1, 0).times_time_power(1, 1);
        assert!(op.apply_to_polynomial(&Polynomial::one(1)).is_err());
    }
}
