//! Closed-form asymptotic expansions for parabolic Cauchy problems
//! `(∂_t + A)u = 0`, `u(T,·) = φ`, with `A = Σ_{|α|≤2} a_α(t,x) D^α`.
//!
//! The solution is approximated by `ū_N = Σ_{n≤N} u_n`, where `u_0` is an
//! integral against a Gaussian kernel and every correction is a differential
//! operator in the Weyl algebra applied to that kernel.

pub mod algebra;
pub mod basis;
pub mod engine;
pub mod error;
pub mod gaussian;
mod interp;
pub mod lab;
pub mod oracles;
pub mod payoff;

pub use algebra::{compositions, MultiIndex, Polynomial, WeylOperator};
pub use basis::{CoefficientField, CoefficientModel, ExpansionScheme};
pub use engine::{ExpansionPlan, FrozenPoint, Solution, TimeIntegration};
pub use error::{Error, Result};
pub use gaussian::{GaussianKernel, PolyGaussian, Quadrature};
pub use payoff::Payoff;
