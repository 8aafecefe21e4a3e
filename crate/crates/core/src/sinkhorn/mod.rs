//! Scaling solver for entropy-regularized transport subproblems.

mod kernel;
mod solver;

pub use kernel::{GibbsKernel, KernelMatrix};
pub use solver::{
    dual_objective, recover_plan, sinkhorn_solve, to_dual_potentials, ScalingState, SinkhornConfig, SinkhornStatus,
    SinkhornStop,
};
