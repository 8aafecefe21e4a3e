use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::polytope::{Csr, Pattern};

/// Nonnegative Gibbs kernel, dense or sparse.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelMatrix {
    Dense(Array2<f64>),
    Sparse(Csr),
}

impl KernelMatrix {
    pub fn dense(m: Array2<f64>) -> Result<Self> {
        check_entries(m.iter())?;
        Ok(Self::Dense(m))
    }

    pub fn sparse(m: Csr) -> Result<Self> {
        check_entries(m.values().iter())?;
        Ok(Self::Sparse(m))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Dense(m) => m.dim(),
            Self::Sparse(s) => s.shape(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Self::Dense(m) => m.len(),
            Self::Sparse(s) => s.nnz(),
        }
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        match self {
            Self::Dense(m) => m[(j, k)],
            Self::Sparse(s) => s.get(j, k),
        }
    }

    pub fn matvec(&self, x: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Self::Dense(m) => m.dot(&x),
            Self::Sparse(s) => s.matvec(x),
        }
    }

    pub fn tmatvec(&self, y: ArrayView1<f64>) -> Array1<f64> {
        match self {
            Self::Dense(m) => m.t().dot(&y),
            Self::Sparse(s) => s.tmatvec(y),
        }
    }

    pub fn sum(&self) -> f64 {
        match self {
            Self::Dense(m) => m.sum(),
            Self::Sparse(s) => s.sum(),
        }
    }

    /// Stored positions, if sparse.
    pub fn pattern(&self) -> Option<&Pattern> {
        match self {
            Self::Dense(_) => None,
            Self::Sparse(s) => Some(s.pattern()),
        }
    }
}

fn check_entries<'a>(mut it: impl Iterator<Item = &'a f64>) -> Result<()> {
    if let Some(x) = it.find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Domain(format!("kernel entry {x} is not finite nonnegative")));
    }
    Ok(())
}

/// Gibbs kernel exp(−(ĉ − r 1ᵀ − 1 sᵀ)/λ) of an effective cost ĉ, with row
/// and column minima r, s removed first. The shift is a constant on U(a,b),
/// so plans are unchanged and true duals are λ log ǔ + r, λ log v̌ + s.
/// Entries with ĉ = +∞ give zero kernel entries.
#[derive(Clone, Debug)]
pub struct GibbsKernel {
    pub kernel: KernelMatrix,
    pub row_shift: Array1<f64>,
    pub col_shift: Array1<f64>,
    pub lambda: f64,
}

impl GibbsKernel {
    pub fn dense(cost: &Array2<f64>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let (m, n) = cost.dim();
        let mut r = Array1::from_elem(m, f64::INFINITY);
        for ((j, _), &c) in cost.indexed_iter() {
            check_cost(c)?;
            r[j] = r[j].min(c);
        }
        let r = r.mapv(|x| if x.is_finite() { x } else { 0.0 });
        let mut s = Array1::from_elem(n, f64::INFINITY);
        for ((j, k), &c) in cost.indexed_iter() {
            s[k] = s[k].min(c - r[j]);
        }
        let s = s.mapv(|x| if x.is_finite() { x } else { 0.0 });
        let k = Array2::from_shape_fn((m, n), |(j, k)| gibbs(cost[(j, k)] - r[j] - s[k], lambda));
        if k.iter().all(|&x| x == 0.0) {
            return Err(Error::KernelUnderflow);
        }
        Ok(Self { kernel: KernelMatrix::Dense(k), row_shift: r, col_shift: s, lambda })
    }

    /// `cost` holds ĉ on the stored pattern only.
    pub fn sparse(cost: &Csr, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let (m, n) = cost.shape();
        let mut r = Array1::from_elem(m, f64::INFINITY);
        for (j, _, c) in cost.iter() {
            check_cost(c)?;
            r[j] = r[j].min(c);
        }
        let r = r.mapv(|x| if x.is_finite() { x } else { 0.0 });
        let mut s = Array1::from_elem(n, f64::INFINITY);
        for (j, k, c) in cost.iter() {
            s[k] = s[k].min(c - r[j]);
        }
        let s = s.mapv(|x| if x.is_finite() { x } else { 0.0 });
        let k = cost.map(|j, k, c| gibbs(c - r[j] - s[k], lambda));
        if k.values().iter().all(|&x| x == 0.0) {
            return Err(Error::KernelUnderflow);
        }
        Ok(Self { kernel: KernelMatrix::Sparse(k), row_shift: r, col_shift: s, lambda })
    }

    /// True-scale dual potentials of a scaling state.
    pub fn duals(&self, u_check: &Array1<f64>, v_check: &Array1<f64>) -> (Array1<f64>, Array1<f64>) {
        let l = self.lambda;
        let u = Array1::from_shape_fn(u_check.len(), |j| l * u_check[j].ln() + self.row_shift[j]);
        let v = Array1::from_shape_fn(v_check.len(), |k| l * v_check[k].ln() + self.col_shift[k]);
        (u, v)
    }

    /// Scalings for this kernel reproducing true duals (u, v).
    pub fn scalings_from_duals(&self, u: &Array1<f64>, v: &Array1<f64>) -> (Array1<f64>, Array1<f64>) {
        let l = self.lambda;
        let us = Array1::from_shape_fn(u.len(), |j| clamp_scaling(((u[j] - self.row_shift[j]) / l).exp()));
        let vs = Array1::from_shape_fn(v.len(), |k| clamp_scaling(((v[k] - self.col_shift[k]) / l).exp()));
        (us, vs)
    }
}

fn gibbs(c: f64, lambda: f64) -> f64 {
    if c.is_finite() {
        (-c / lambda).exp()
    } else {
        0.0
    }
}

fn clamp_scaling(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        x.clamp(1e-250, 1e250)
    } else {
        1.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("regularization {lambda} must be positive")));
    }
    Ok(())
}

fn check_cost(c: f64) -> Result<()> {
    if c.is_nan() || c == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("invalid cost entry {c}")));
    }
    Ok(())
}
