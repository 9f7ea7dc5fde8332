//! Model ingestion and the polynomial expansion schemes of the coefficients.

mod field;
mod scheme;

pub use field::{CoefficientField, CoefficientModel, FnModel, PolynomialModel, DEFAULT_ELLIPTICITY_SAMPLES};
pub use scheme::{CenterPath, CentredExpansion, ExpansionScheme};

