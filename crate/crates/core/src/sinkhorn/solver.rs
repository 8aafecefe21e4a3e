use ndarray::{Array1, Array2, Zip};

use super::kernel::KernelMatrix;
use crate::error::{Error, Result};
use crate::polytope::{Marginal, Plan, Storage};

/// Multiplicative scalings (ǔ, v̌).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingState {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
}

impl ScalingState {
    pub fn ones(m: usize, n: usize) -> Self {
        Self { u: Array1::ones(m), v: Array1::ones(n) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkhornConfig {
    pub s_max: usize,
    pub feas_tol: f64,
    pub underflow_floor: f64,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self { s_max: 20, feas_tol: 1e-6, underflow_floor: 1e-300 }
    }
}

impl SinkhornConfig {
    /// Settings used where subproblems are meant to be solved exactly.
    pub fn exact() -> Self {
        Self { s_max: 10_000, feas_tol: 1e-10, underflow_floor: 1e-300 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinkhornStop {
    Converged,
    MaxSweeps,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkhornStatus {
    pub stop: SinkhornStop,
    pub sweeps: usize,
    /// Row violation ‖ǔ ⊙ K v̌ − a‖∞ at exit; column sums are exact after a sweep.
    pub violation: f64,
}

/// q(u,v) = λ exp(u/λ)ᵀ K exp(v/λ) − uᵀa − vᵀb.
pub fn dual_objective(u: &Array1<f64>, v: &Array1<f64>, lambda: f64, k: &KernelMatrix, a: &Marginal, b: &Marginal) -> Result<f64> {
    let (m, n) = k.shape();
    if u.len() != m || v.len() != n || a.len() != m || b.len() != n {
        return Err(Error::Shape { expected: (m, n), got: (u.len(), v.len()) });
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain("λ must be positive".into()));
    }
    let max_exp = u.iter().chain(v.iter()).fold(f64::NEG_INFINITY, |s, &x| s.max(x / lambda));
    if max_exp > 700.0 {
        return Err(Error::Overflow { max_exponent: max_exp });
    }
    let eu = u.mapv(|x| (x / lambda).exp());
    let ev = v.mapv(|x| (x / lambda).exp());
    let quad = eu.dot(&k.matvec(ev.view()));
    Ok(lambda * quad - u.dot(a.masses()) - v.dot(b.masses()))
}

/// Alternating scaling ǔ ← a ⊘ (K v̌), v̌ ← b ⊘ (Kᵀ ǔ) from `warm` or all-ones.
pub fn sinkhorn_solve(
    k: &KernelMatrix,
    a: &Marginal,
    b: &Marginal,
    cfg: &SinkhornConfig,
    warm: Option<&ScalingState>,
) -> Result<(ScalingState, SinkhornStatus)> {
    let (m, n) = k.shape();
    if a.len() != m || b.len() != n {
        return Err(Error::Shape { expected: (m, n), got: (a.len(), b.len()) });
    }
    if cfg.s_max == 0 || !(cfg.feas_tol > 0.0) {
        return Err(Error::Domain("s_max must be ≥ 1 and feas_tol > 0".into()));
    }
    let mut state = match warm {
        Some(w) if w.u.len() == m && w.v.len() == n => w.clone(),
        Some(w) => return Err(Error::Shape { expected: (m, n), got: (w.u.len(), w.v.len()) }),
        None => ScalingState::ones(m, n),
    };
    let (am, bm) = (a.masses(), b.masses());
    let mut sweeps = 0;
    let check_first = warm.is_some();
    loop {
        let kv = k.matvec(state.v.view());
        if sweeps > 0 || check_first {
            let viol = row_violation(&state.u, &kv, am);
            if viol <= cfg.feas_tol {
                return Ok((state, SinkhornStatus { stop: SinkhornStop::Converged, sweeps, violation: viol }));
            }
            if sweeps >= cfg.s_max {
                return Ok((state, SinkhornStatus { stop: SinkhornStop::MaxSweeps, sweeps, violation: viol }));
            }
        }
        scale(&mut state.u, am, &kv, cfg.underflow_floor, "row")?;
        let ktu = k.tmatvec(state.u.view());
        scale(&mut state.v, bm, &ktu, cfg.underflow_floor, "column")?;
        sweeps += 1;
    }
}

fn row_violation(u: &Array1<f64>, kv: &Array1<f64>, a: &Array1<f64>) -> f64 {
    let mut viol = 0.0f64;
    Zip::from(u).and(kv).and(a).for_each(|&x, &y, &t| viol = viol.max((x * y - t).abs()));
    viol
}

fn scale(out: &mut Array1<f64>, target: &Array1<f64>, denom: &Array1<f64>, floor: f64, side: &str) -> Result<()> {
    for (j, (o, (&t, &d))) in out.iter_mut().zip(target.iter().zip(denom.iter())).enumerate() {
        if t == 0.0 {
            *o = 0.0;
            continue;
        }
        if d == 0.0 {
            return Err(Error::InfeasibleSupport(format!("{side} {j} has no kernel mass")));
        }
        if !(d > floor) || !d.is_finite() {
            return Err(Error::InfeasibleSupport(format!("{side} {j}: scaling denominator {d:e} at or below floor")));
        }
        let x = t / d;
        if !x.is_finite() {
            return Err(Error::InfeasibleSupport(format!("{side} {j}: scaling diverged")));
        }
        *o = x;
    }
    Ok(())
}

/// Diag(ǔ) K Diag(v̌); storage follows the kernel.
pub fn recover_plan(state: &ScalingState, k: &KernelMatrix, a: &Marginal, b: &Marginal) -> Result<Plan> {
    let (u, v) = (&state.u, &state.v);
    let storage = match k {
        KernelMatrix::Dense(m) => {
            let mut p = Array2::zeros(m.dim());
            Zip::indexed(&mut p).and(m).for_each(|(j, l), out, &x| *out = u[j] * x * v[l]);
            Storage::Dense(p)
        }
        KernelMatrix::Sparse(s) => Storage::Sparse(s.map(|j, l, x| u[j] * x * v[l])),
    };
    Plan::new(storage, a.clone(), b.clone())
}

/// (λ log ǔ, λ log v̌).
pub fn to_dual_potentials(state: &ScalingState, lambda: f64) -> Result<(Array1<f64>, Array1<f64>)> {
    if state.u.iter().chain(state.v.iter()).any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain("scalings must be strictly positive".into()));
    }
    Ok((state.u.mapv(|x| lambda * x.ln()), state.v.mapv(|x| lambda * x.ln())))
}
