//! Exact symbolic kernel: multi-indices, multivariate polynomials, the
//! normal-ordered Weyl algebra in `(x, ∇_x)`, and simplex integration of time
//! monomials.

mod compositions;
mod multi_index;
mod polynomial;
mod scalar;
mod weyl;

pub use compositions::compositions;
pub use multi_index::MultiIndex;
pub use polynomial::Polynomial;
pub use scalar::{rational, Scalar, FLOAT_PRUNE};
pub use weyl::{simplex_monomial_integral, TimeMonomial, TimePowers, WeylKey, WeylOperator};

pub(crate) use multi_index::{binomial, factorial};
