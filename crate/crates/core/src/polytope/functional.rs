use ndarray::Array2;

use super::marginal::{check_balanced, Marginal};
use super::plan::Plan;
use crate::error::{Error, Result};

fn xlogx_minus_x(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * (t.ln() - 1.0)
    }
}

/// h(T) = Σ t (log t − 1), with 0·(log 0 − 1) = 0.
pub fn neg_entropy(t: &Array2<f64>) -> Result<f64> {
    let mut h = 0.0;
    for &x in t {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("negative entry {x} in entropy argument")));
        }
        h += xlogx_minus_x(x);
    }
    Ok(h)
}

/// Entropy of a plan over its stored entries.
pub fn plan_neg_entropy(p: &Plan) -> f64 {
    p.entries().map(|(_, _, x)| xlogx_minus_x(x)).sum()
}

/// h(abᵀ) computed from the factors.
pub fn product_neg_entropy(a: &Marginal, b: &Marginal) -> f64 {
    let mut h = 0.0;
    for &x in a.masses() {
        for &y in b.masses() {
            h += xlogx_minus_x(x * y);
        }
    }
    h
}

/// KL(T;T′) = Σ t(log t − log t′) − (t − t′); +∞ when t > 0 = t′.
pub fn kl_divergence(t: &Array2<f64>, t_ref: &Array2<f64>) -> Result<f64> {
    if t.dim() != t_ref.dim() {
        return Err(Error::Shape { expected: t_ref.dim(), got: t.dim() });
    }
    let mut kl = 0.0;
    for (&x, &y) in t.iter().zip(t_ref.iter()) {
        if !(x >= 0.0) || !(y >= 0.0) {
            return Err(Error::Domain("negative entry in KL argument".into()));
        }
        if x > 0.0 {
            if y == 0.0 {
                return Ok(f64::INFINITY);
            }
            kl += x * (x.ln() - y.ln()) - (x - y);
        } else {
            kl += y;
        }
    }
    Ok(kl)
}

/// max(‖T1 − a‖∞, ‖Tᵀ1 − b‖∞).
pub fn marginal_violation(p: &Plan) -> f64 {
    let r = (&p.row_sums() - p.row_target().masses()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let c = (&p.col_sums() - p.col_target().masses()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    r.max(c)
}

/// min{√m‖a‖∞, √n‖b‖∞}; any two plans in U(a,b) are within 2d in Frobenius norm.
pub fn diameter_bound(a: &Marginal, b: &Marginal) -> Result<f64> {
    check_balanced(a, b)?;
    Ok(((a.len() as f64).sqrt() * a.max()).min((b.len() as f64).sqrt() * b.max()))
}

/// Constants entering the averaged residual bound for ERALM.
#[derive(Clone, Debug)]
pub struct TheoryBound {
    pub lipschitz: f64,
    pub f_lower: f64,
    pub d: Vec<f64>,
    pub d_bar: f64,
    pub h_bar: f64,
    pub lambda: f64,
    pub t_max: usize,
}

impl TheoryBound {
    pub fn new(marginals: &[(Marginal, Marginal)], lipschitz: f64, f_lower: f64, lambda: f64, t_max: usize) -> Result<Self> {
        if !(lipschitz >= 0.0) {
            return Err(Error::Domain("Lipschitz constant must be nonnegative".into()));
        }
        let d = marginals.iter().map(|(a, b)| diameter_bound(a, b)).collect::<Result<Vec<_>>>()?;
        let d_bar = d.iter().cloned().fold(0.0, f64::max);
        let h_min = marginals.iter().map(|(a, b)| product_neg_entropy(a, b)).fold(f64::INFINITY, f64::min);
        Ok(Self { lipschitz, f_lower, d, d_bar, h_bar: -h_min, lambda, t_max })
    }

    pub fn blocks(&self) -> usize {
        self.d.len()
    }
}
