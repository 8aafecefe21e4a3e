//! Transport polytope primitives: marginals, plans, entropy and KL
//! functionals, the exact transport LP and the stationarity residual.

mod csr;
mod functional;
pub mod io;
mod lp;
mod marginal;
mod oracle;
mod plan;
mod residual;

pub use csr::{Csr, Pattern};
pub use io::{fmt_g17, read_marginal, read_plan, write_marginal, write_plan};
pub use functional::{
    diameter_bound, kl_divergence, marginal_violation, neg_entropy, plan_neg_entropy, product_neg_entropy,
    TheoryBound,
};
pub use lp::{transport_lp, transport_lp_detailed, LpSolution};
pub use marginal::{check_balanced, Marginal};
pub use oracle::ObjectiveOracle;
pub use plan::{Plan, Storage};
pub use residual::{residual, residual_with_tol, FEASIBILITY_TOL};
