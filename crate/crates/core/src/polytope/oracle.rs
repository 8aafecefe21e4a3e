use ndarray::Array2;

use super::csr::{Csr, Pattern};
use super::plan::Plan;

/// Smooth multi-block objective f(X_1, …, X_N) over transport polytopes.
pub trait ObjectiveOracle {
    fn block_count(&self) -> usize;

    fn block_shape(&self, i: usize) -> (usize, usize);

    fn objective(&self, x: &[Plan]) -> f64;

    /// ∇_i f at x.
    fn block_gradient(&self, i: usize, x: &[Plan]) -> Array2<f64>;

    /// ∇_i f gathered on `pattern`. Oracles that can evaluate single entries
    /// cheaply should override this.
    fn block_gradient_entries(&self, i: usize, x: &[Plan], pattern: &Pattern) -> Csr {
        Csr::gather(&self.block_gradient(i, x), pattern)
    }
}
