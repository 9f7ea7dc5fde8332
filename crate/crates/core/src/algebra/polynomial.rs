use std::collections::BTreeMap;
use std::fmt;

use super::multi_index::{binomial, falling, MultiIndex};
use super::scalar::Scalar;
use crate::error::{ensure_dim, Error, Result};

/// Multivariate polynomial `Σ c_β x^β` in `d` variables.
///
/// Terms with negligible coefficients are never stored, so the zero polynomial
/// has an empty term map.
#[derive(Clone, PartialEq)]
pub struct Polynomial<S: Scalar = f64> {
    dim: usize,
    terms: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, S::one())
    }

    pub fn constant(dim: usize, c: S) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    pub fn monomial(exponent: MultiIndex, c: S) -> Self {
        let mut p = Self::zero(exponent.dim());
        p.add_term(exponent, c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, i), S::one())
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, S)>,
    {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            ensure_dim(dim, e.dim())?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn coefficient(&self, exponent: &MultiIndex) -> S {
        self.terms.get(exponent).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.terms.iter()
    }

    pub(crate) fn add_term(&mut self, exponent: MultiIndex, c: S) {
        if c.is_negligible() {
            return;
        }
        match self.terms.remove(&exponent) {
            Some(prev) => {
                let sum = prev + c;
                if !sum.is_negligible() {
                    self.terms.insert(exponent, sum);
                }
            }
            None => {
                self.terms.insert(exponent, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        ensure_dim(self.dim, other.dim)?;
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..exp {
            acc = acc.mul(self).expect("same dimension");
        }
        acc
    }

    /// Returns `p(x - shift)`, i.e. re-expresses the polynomial in the centred
    /// monomials `(x - shift)^β`.
    pub fn substitute_affine(&self, shift: &[S]) -> Result<Self> {
        ensure_dim(self.dim, shift.len())?;
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            // (x_i - s_i)^{b} = Σ_k C(b,k) x_i^k (-s_i)^{b-k}
            let mut partial: Vec<(MultiIndex, S)> = vec![(MultiIndex::zeros(self.dim), c.clone())];
            for (i, b) in e.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let neg_shift = -shift[i].clone();
                let mut next = Vec::with_capacity(partial.len() * (b as usize + 1));
                for (pe, pc) in &partial {
                    for k in 0..=b {
                        let coef = pc.clone()
                            * S::from_integer(binomial(b, k))
                            * neg_shift.pow(b - k);
                        let mut ne = pe.clone();
                        for _ in 0..k {
                            ne = ne.incremented(i);
                        }
                        next.push((ne, coef));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(pe, pc);
            }
        }
        Ok(out)
    }

    /// Returns `p(A (x - shift))` for a square matrix `A` given row-major.
    pub fn substitute_linear(&self, matrix: &[Vec<S>], shift: &[S]) -> Result<Self> {
        ensure_dim(self.dim, matrix.len())?;
        ensure_dim(self.dim, shift.len())?;
        let images: Vec<Polynomial<S>> = matrix
            .iter()
            .map(|row| {
                ensure_dim(self.dim, row.len())?;
                let mut l = Polynomial::zero(self.dim);
                for (j, a) in row.iter().enumerate() {
                    l.add_term(MultiIndex::unit(self.dim, j), a.clone());
                    l.add_term(MultiIndex::zeros(self.dim), -(a.clone() * shift[j].clone()));
                }
                Ok(l)
            })
            .collect::<Result<_>>()?;
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.dim, c.clone());
            for (i, b) in e.iter().enumerate() {
                if b > 0 {
                    term = term.mul(&images[i].pow(b))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        ensure_dim(self.dim, x.len())?;
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (i, b) in e.iter().enumerate() {
                if b > 0 {
                    m = m * x[i].pow(b);
                }
            }
            acc = acc + m;
        }
        Ok(acc)
    }

    /// `∂_{x_i} p`
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.dim {
            return Err(Error::InvalidInput(format!(
                "derivative index {i} out of range for dimension {}",
                self.dim
            )));
        }
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let b = e.get(i);
            if b == 0 {
                continue;
            }
            let mut ne = e.clone();
            let lowered = MultiIndex::unit(self.dim, i);
            ne = ne.checked_sub(&lowered).expect("positive exponent");
            out.add_term(ne, c.clone() * S::from_integer(b as i64));
        }
        Ok(out)
    }

    /// `D^α p`
    pub fn derivative_multi(&self, alpha: &MultiIndex) -> Result<Self> {
        ensure_dim(self.dim, alpha.dim())?;
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if let Some(rest) = e.checked_sub(alpha) {
                let factor: i64 = e
                    .iter()
                    .zip(alpha.iter())
                    .map(|(b, a)| falling(b, a))
                    .product();
                out.add_term(rest, c.clone() * S::from_integer(factor));
            }
        }
        Ok(out)
    }

    pub fn map_coefficients<T: Scalar, F: Fn(&S) -> T>(&self, f: F) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }
}

impl Polynomial<f64> {
    /// Drops terms below `rel` times the largest coefficient magnitude.
    pub fn prune_relative(&self, rel: f64) -> Self {
        let max = self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()));
        let cut = max * rel;
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if c.abs() > cut {
                out.add_term(e.clone(), *c);
            }
        }
        out
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl<S: Scalar> fmt::Debug for Polynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}·x^{e}")?;
        }
        Ok(())
    }
}
