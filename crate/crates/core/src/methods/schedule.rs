use ndarray::Array1;

use crate::error::{Error, Result};
use crate::polytope::TheoryBound;

/// (t+1)^(−p).
pub fn power_decay(t: usize, p: f64) -> f64 {
    ((t + 1) as f64).powf(-p)
}

/// Smallest horizon for which the theoretical step stays ≤ 1.
pub fn theoretical_t_min(tb: &TheoryBound, f0_gap: f64) -> f64 {
    let n = tb.blocks() as f64;
    f0_gap / (2.0 * tb.d_bar * tb.d_bar * tb.lipschitz * n * (2.0 * n.sqrt() + 1.0))
}

/// α = (1/d̄) √((f(X⁰) − f̲) / (2 L N (2√N + 1) t_max)).
pub fn theoretical_step(tb: &TheoryBound, f0_gap: f64) -> Result<f64> {
    let n = tb.blocks() as f64;
    if !(f0_gap > 0.0) || !(tb.lipschitz > 0.0) || !(tb.d_bar > 0.0) || tb.t_max == 0 {
        return Err(Error::Domain("theoretical step needs f gap, L, d̄ and t_max all positive".into()));
    }
    let alpha = (f0_gap / (2.0 * tb.lipschitz * n * (2.0 * n.sqrt() + 1.0) * tb.t_max as f64)).sqrt() / tb.d_bar;
    if alpha > 1.0 {
        return Err(Error::StepTooLarge { alpha, t_min: theoretical_t_min(tb, f0_gap) });
    }
    Ok(alpha)
}

/// 2 d̄ (2N+1) √(L (f(X⁰) − f̲) / t_max) + N λ h̄.
pub fn residual_bound(tb: &TheoryBound, f0_gap: f64) -> f64 {
    let n = tb.blocks() as f64;
    2.0 * tb.d_bar * (2.0 * n + 1.0) * (tb.lipschitz * f0_gap / tb.t_max as f64).sqrt() + n * tb.lambda * tb.h_bar
}

/// Smallest value the adaptive parameter may take.
pub const PARAMETER_FLOOR: f64 = 1e-12;

/// σ‖v‖∞/(20 log K), floored at 1e−12. Returns the value and whether the floor applied.
pub fn adaptive_parameter(v: &Array1<f64>, grid: usize, sigma: f64) -> Result<(f64, bool)> {
    if grid < 2 {
        return Err(Error::Domain("grid size must be at least 2".into()));
    }
    let norm = v.iter().fold(0.0f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { m });
    let p = sigma * norm / (20.0 * (grid as f64).ln());
    if p > PARAMETER_FLOOR {
        Ok((p, false))
    } else {
        Ok((PARAMETER_FLOOR, true))
    }
}
