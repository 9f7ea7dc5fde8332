//! Reference solvers used to validate the expansion: finite differences,
//! closed forms for constant coefficients, the heat-kernel bound and Monte
//! Carlo.

mod density;
mod exact;
mod fd;
mod mc;

pub use density::fd_density;
pub use exact::{exact_constant_solution, heat_kernel_bound, ConstantCoefficients};
pub use fd::{fd_solve, fd_value, Boundary, FdSolution, GridSpec, DEFAULT_WIDTH_SD};
pub use mc::{mc_solve, McEstimate, McSettings};
