use std::fmt;

use smallvec::SmallVec;

/// Exponent vector `α = (α_1, ..., α_d)` with non-negative entries.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new<I: IntoIterator<Item = u32>>(exponents: I) -> Self {
        MultiIndex(exponents.into_iter().collect())
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    /// The unit vector `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[i] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α! = α_1! ⋯ α_d!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<SmallVec<_>>>()
            .map(MultiIndex)
    }

    pub fn incremented(&self, i: usize) -> MultiIndex {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `x^α`
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }

    /// All multi-indices `γ ≤ self` componentwise, in lexicographic order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zeros(self.dim())];
        for i in 0..self.dim() {
            let mut next = Vec::with_capacity(out.len() * (self.0[i] as usize + 1));
            for base in &out {
                for k in 0..=self.0[i] {
                    let mut m = base.clone();
                    m.0[i] = k;
                    next.push(m);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// All multi-indices of dimension `dim` with `|α| = order`.
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = MultiIndex::zeros(dim);
        fill_order(&mut out, &mut current, 0, order);
        out.sort();
        out
    }

    /// All multi-indices of dimension `dim` with `|α| ≤ max_order`, grouped by order.
    pub fn all_up_to(dim: usize, max_order: u32) -> Vec<MultiIndex> {
        (0..=max_order)
            .flat_map(|n| Self::all_of_order(dim, n))
            .collect()
    }
}

fn fill_order(out: &mut Vec<MultiIndex>, current: &mut MultiIndex, pos: usize, remaining: u32) {
    let dim = current.dim();
    if dim == 0 {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    if pos == dim - 1 {
        current.0[pos] = remaining;
        out.push(current.clone());
        current.0[pos] = 0;
        return;
    }
    for k in 0..=remaining {
        current.0[pos] = k;
        fill_order(out, current, pos + 1, remaining - k);
    }
    current.0[pos] = 0;
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `n (n-1) ⋯ (n-k+1)`
pub(crate) fn falling(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as i64).product()
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v.into_iter().collect())
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(v: [u32; N]) -> Self {
        MultiIndex(v.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_factorial() {
        let a = MultiIndex::from([2, 0, 3]);
        assert_eq!(a.order(), 5);
        assert_eq!(a.factorial(), 12.0);
        assert_eq!(MultiIndex::zeros(3).factorial(), 1.0);
    }

    #[test]
    fn enumerations() {
        assert_eq!(MultiIndex::all_of_order(2, 2).len(), 3);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        assert_eq!(MultiIndex::from([1, 2]).sub_indices().len(), 6);
    }

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(falling(5, 2), 20);
        assert_eq!(falling(2, 3), 0);
    }
}
