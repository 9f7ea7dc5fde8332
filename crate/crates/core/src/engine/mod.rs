//! The expansion engine: `G_n`, `L_n`, `ū_N`, `Γ̄_N` and the bootstrapped
//! long-horizon scheme.

mod bootstrap;
mod duhamel;
mod operators;
mod plan;

pub use bootstrap::{bootstrap_solve, BootstrapSettings};
pub use duhamel::{duhamel_u1, DuhamelQuadrature};

pub use operators::{
    adjoint_dilation_operators, dilation_operators, g_bar_operator, g_operator, l_operator_exact,
    substitute_operators,
};
pub use plan::{
    default_quadrature, ExpansionCache, ExpansionPlan, FrozenPoint, LocalExpansion, Solution, TimeIntegration,
    DEFAULT_PRUNE, DEFAULT_TIME_QUADRATURE,
};
