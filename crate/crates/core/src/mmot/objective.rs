//! Objective and block gradients of the penalized Monge-ansatz problem
//!
//! f(Y) = Σ_i ⟨Y_i, C + βΛ⁻¹⟩ + Σ_{i<j} ⟨Y_i, Λ⁻¹ Y_j C + β Λ⁻² Y_j⟩,
//! ∇_i f = C + βΛ⁻¹ + Σ_{j≠i} (Λ⁻¹ Y_j C + β Λ⁻² Y_j).

use ndarray::{Array1, Array2, Axis};

use super::system::DiscreteSystem;
use crate::polytope::{Csr, ObjectiveOracle, Pattern, Plan, Storage};

/// N_e − 1 coupling blocks of size K_trunc × K_trunc.
pub struct MmotOracle<'a> {
    sys: &'a DiscreteSystem,
    inv: Array1<f64>,
}

impl<'a> MmotOracle<'a> {
    pub fn new(sys: &'a DiscreteSystem) -> Self {
        let inv = sys.masses.mapv(|x| 1.0 / x);
        Self { sys, inv }
    }

    pub fn system(&self) -> &DiscreteSystem {
        self.sys
    }

    /// (Y C)_kl.
    fn yc_entry(&self, y: &Plan, k: usize, l: usize) -> f64 {
        match y.storage() {
            Storage::Dense(m) => match self.sys.dense_cost() {
                Some(c) => m.row(k).dot(&c.row(l)),
                None => m.row(k).iter().enumerate().map(|(q, &v)| if v != 0.0 { v * self.sys.cost(q, l) } else { 0.0 }).sum(),
            },
            Storage::Sparse(s) => {
                let (idx, val) = s.row(k);
                idx.iter().zip(val).map(|(&q, &v)| v * self.sys.cost(q, l)).sum()
            }
        }
    }

    /// Y C as a dense matrix.
    fn yc_dense(&self, y: &Plan) -> Array2<f64> {
        let owned;
        let c = match self.sys.dense_cost() {
            Some(c) => c,
            None => {
                owned = self.sys.cost_matrix();
                &owned
            }
        };
        match y.storage() {
            Storage::Dense(m) => m.dot(c),
            Storage::Sparse(s) => {
                let mut out = Array2::zeros((s.shape().0, c.ncols()));
                for (k, q, v) in s.iter() {
                    out.row_mut(k).scaled_add(v, &c.row(q));
                }
                out
            }
        }
    }

    fn linear_term(&self, y: &Plan) -> f64 {
        let beta = self.sys.beta;
        y.dot_fn(|k, l| self.sys.cost(k, l) + if k == l { beta * self.inv[k] } else { 0.0 })
    }

    fn pair_term(&self, yi: &Plan, yj: &Plan) -> f64 {
        let beta = self.sys.beta;
        match yi.storage() {
            Storage::Sparse(s) => s
                .iter()
                .filter(|t| t.2 != 0.0)
                .map(|(k, l, v)| {
                    let w = self.inv[k];
                    v * w * (self.yc_entry(yj, k, l) + beta * w * yj.get(k, l))
                })
                .sum(),
            Storage::Dense(m) => {
                let yc = self.yc_dense(yj);
                let mut s = 0.0;
                for (k, row) in m.axis_iter(Axis(0)).enumerate() {
                    let w = self.inv[k];
                    let mut acc = row.dot(&yc.row(k));
                    acc += match yj.storage() {
                        Storage::Dense(d) => beta * w * row.dot(&d.row(k)),
                        Storage::Sparse(sp) => {
                            let (idx, val) = sp.row(k);
                            beta * w * idx.iter().zip(val).map(|(&l, &v)| v * row[l]).sum::<f64>()
                        }
                    };
                    s += w * acc;
                }
                s
            }
        }
    }
}

impl ObjectiveOracle for MmotOracle<'_> {
    fn block_count(&self) -> usize {
        self.sys.n_electrons - 1
    }

    fn block_shape(&self, _i: usize) -> (usize, usize) {
        (self.sys.len(), self.sys.len())
    }

    fn objective(&self, y: &[Plan]) -> f64 {
        let mut f: f64 = y.iter().map(|p| self.linear_term(p)).sum();
        for i in 0..y.len() {
            for j in i + 1..y.len() {
                f += self.pair_term(&y[i], &y[j]);
            }
        }
        f
    }

    fn block_gradient(&self, i: usize, y: &[Plan]) -> Array2<f64> {
        let beta = self.sys.beta;
        let mut g = self.sys.cost_matrix();
        for k in 0..self.sys.len() {
            g[(k, k)] += beta * self.inv[k];
        }
        for (j, yj) in y.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut t = self.yc_dense(yj);
            match yj.storage() {
                Storage::Dense(d) => t.scaled_add(beta, &(d * &self.inv.view().insert_axis(Axis(1)))),
                Storage::Sparse(s) => {
                    for (k, l, v) in s.iter() {
                        t[(k, l)] += beta * self.inv[k] * v;
                    }
                }
            }
            g += &(t * &self.inv.view().insert_axis(Axis(1)));
        }
        g
    }

    fn block_gradient_entries(&self, i: usize, y: &[Plan], pattern: &Pattern) -> Csr {
        let beta = self.sys.beta;
        let values = pattern
            .iter()
            .map(|(k, l)| {
                let w = self.inv[k];
                let mut g = self.sys.cost(k, l) + if k == l { beta * w } else { 0.0 };
                for (j, yj) in y.iter().enumerate() {
                    if j != i {
                        g += w * (self.yc_entry(yj, k, l) + beta * w * yj.get(k, l));
                    }
                }
                g
            })
            .collect();
        Csr::new(pattern.clone(), values).expect("one value per pattern entry")
    }
}
