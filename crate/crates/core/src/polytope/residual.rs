use super::functional::marginal_violation;
use super::lp::transport_lp;
use super::oracle::ObjectiveOracle;
use super::plan::Plan;
use crate::error::{Error, Result};

/// Feasibility tolerance for membership in U(a,b).
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Per-block gaps R_i = ⟨∇_i f, X_i⟩ − min_{T∈U(a_i,b_i)} ⟨∇_i f, T⟩ and their sum.
pub fn residual(x: &[Plan], oracle: &dyn ObjectiveOracle) -> Result<(Vec<f64>, f64)> {
    residual_with_tol(x, oracle, FEASIBILITY_TOL)
}

pub fn residual_with_tol(x: &[Plan], oracle: &dyn ObjectiveOracle, tol: f64) -> Result<(Vec<f64>, f64)> {
    let mut per = Vec::with_capacity(x.len());
    for (i, xi) in x.iter().enumerate() {
        let viol = marginal_violation(xi);
        if viol > tol {
            return Err(Error::InfeasiblePlan { violation: viol, tol });
        }
        let g = oracle.block_gradient(i, x);
        let (_, lp) = transport_lp(&g, xi.row_target(), xi.col_target())?;
        per.push(xi.dot(&g) - lp);
    }
    let total = per.iter().sum();
    Ok((per, total))
}
