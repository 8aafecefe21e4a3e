#![allow(dead_code)]

use ndarray::{Array1, Array2};
use otbcd::polytope::{Marginal, ObjectiveOracle, Plan};
use rand::Rng;

/// f(X₁, X₂) = ⟨X₁, W X₂⟩ on two m×n blocks.
pub struct Bilinear {
    pub w: Array2<f64>,
    pub n: usize,
}

impl ObjectiveOracle for Bilinear {
    fn block_count(&self) -> usize {
        2
    }

    fn block_shape(&self, _i: usize) -> (usize, usize) {
        (self.w.nrows(), self.n)
    }

    fn objective(&self, x: &[Plan]) -> f64 {
        x[0].dot(&self.w.dot(&x[1].to_dense()))
    }

    fn block_gradient(&self, i: usize, x: &[Plan]) -> Array2<f64> {
        if i == 0 {
            self.w.dot(&x[1].to_dense())
        } else {
            self.w.t().dot(&x[0].to_dense())
        }
    }
}

impl Bilinear {
    /// Spectral norm of W by power iteration on WᵀW.
    pub fn lipschitz(&self) -> f64 {
        let mut v = Array1::from_elem(self.w.ncols(), 1.0);
        let mut s = 0.0;
        for _ in 0..500 {
            let u = self.w.t().dot(&self.w.dot(&v));
            s = u.dot(&u).sqrt();
            v = u / s;
        }
        s.sqrt()
    }
}

/// f(X) = Σ ⟨W_i, X_i⟩.
pub struct Linear {
    pub w: Vec<Array2<f64>>,
}

impl ObjectiveOracle for Linear {
    fn block_count(&self) -> usize {
        self.w.len()
    }

    fn block_shape(&self, i: usize) -> (usize, usize) {
        self.w[i].dim()
    }

    fn objective(&self, x: &[Plan]) -> f64 {
        x.iter().zip(&self.w).map(|(p, w)| p.dot(w)).sum()
    }

    fn block_gradient(&self, i: usize, _x: &[Plan]) -> Array2<f64> {
        self.w[i].clone()
    }
}

/// Positive probability vector with entries bounded away from zero.
pub fn random_marginal(rng: &mut impl Rng, n: usize) -> Marginal {
    let v = Array1::from_shape_fn(n, |_| rng.gen_range(0.2..1.0));
    let s = v.sum();
    Marginal::new(v / s).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |_| rng.gen_range(0.0..1.0))
}
