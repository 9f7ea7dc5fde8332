//! The leading-order Gaussian kernel, polynomial-times-Gaussian functions,
//! Hermite projections and Gaussian quadrature against payoffs.

mod hermite;
mod kernel;
mod poly_gaussian;
mod quadrature;

pub use hermite::{
    hermite_coefficients, hermite_inner_products, hermite_inner_products_with, hermite_polynomial,
    hermite_value, DEFAULT_HERMITE_QUADRATURE,
};
pub use kernel::{kernel_from_a0, GaussianKernel, SPD_TOLERANCE};
pub use poly_gaussian::{apply_weyl_in_y, apply_weyl_to_kernel, integrate_against, PolyGaussian};
pub use quadrature::{
    gaussian_expectation, integrate_interval, legendre_rule, standard_normal_rule,
    visit_gaussian_nodes, Quadrature,
};

pub(crate) use hermite::whitening;
