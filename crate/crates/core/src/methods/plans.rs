use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::polytope::{Csr, Marginal, Pattern, Plan, Storage};
use crate::sinkhorn::{recover_plan, sinkhorn_solve, KernelMatrix, SinkhornConfig};

/// Sinkhorn projection of a uniformly random positive matrix onto U(a,b).
pub fn random_feasible_plan(a: &Marginal, b: &Marginal, rng: &mut impl Rng) -> Result<Plan> {
    let k = Array2::from_shape_fn((a.len(), b.len()), |_| 1.0 - rng.gen::<f64>());
    let k = KernelMatrix::dense(k)?;
    let cfg = SinkhornConfig { s_max: 10_000, feas_tol: 1e-13 * a.total().max(1e-300), underflow_floor: 1e-300 };
    let (state, _) = sinkhorn_solve(&k, a, b, &cfg, None)?;
    recover_plan(&state, &k, a, b)
}

/// One random feasible plan per block, seeded.
pub fn initial_plans(marginals: &[(Marginal, Marginal)], seed: u64) -> Result<Vec<Plan>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1A17_u64);
    marginals.iter().map(|(a, b)| random_feasible_plan(a, b, &mut rng)).collect()
}

/// Σ_j (1/w_j²) Σ_k (x_jk − y_jk)², skipping rows with w_j = 0.
pub fn weighted_diff_sq(x: &Plan, y: &Plan, w: &Array1<f64>) -> f64 {
    let (m, n) = x.shape();
    let mut buf = vec![0.0; n];
    let mut total = 0.0;
    for j in 0..m {
        if w[j] == 0.0 {
            continue;
        }
        let s = match (x.storage(), y.storage()) {
            (Storage::Sparse(a), Storage::Sparse(b)) => sparse_row_diff_sq(a, b, j),
            _ => {
                buf.iter_mut().for_each(|v| *v = 0.0);
                add_row(&mut buf, x, j, 1.0);
                add_row(&mut buf, y, j, -1.0);
                buf.iter().map(|v| v * v).sum()
            }
        };
        total += s / (w[j] * w[j]);
    }
    total
}

fn add_row(buf: &mut [f64], p: &Plan, j: usize, sign: f64) {
    match p.storage() {
        Storage::Dense(m) => buf.iter_mut().zip(m.row(j)).for_each(|(b, &x)| *b += sign * x),
        Storage::Sparse(s) => {
            let (idx, val) = s.row(j);
            idx.iter().zip(val).for_each(|(&k, &x)| buf[k] += sign * x);
        }
    }
}

fn sparse_row_diff_sq(a: &Csr, b: &Csr, j: usize) -> f64 {
    let (ia, va) = a.row(j);
    let (ib, vb) = b.row(j);
    let (mut p, mut q, mut s) = (0, 0, 0.0);
    while p < ia.len() || q < ib.len() {
        let d = if q == ib.len() || (p < ia.len() && ia[p] < ib[q]) {
            p += 1;
            va[p - 1]
        } else if p == ia.len() || ib[q] < ia[p] {
            q += 1;
            -vb[q - 1]
        } else {
            p += 1;
            q += 1;
            va[p - 1] - vb[q - 1]
        };
        s += d * d;
    }
    s
}

/// Δ = (1/N) Σ_i ‖Diag(w_i)⁻¹ (X_i − X′_i)‖_F.
pub fn delta_metric(prev: &[Plan], curr: &[Plan], weights: &[Array1<f64>]) -> Result<f64> {
    if prev.len() != curr.len() || prev.len() != weights.len() || prev.is_empty() {
        return Err(Error::Domain("delta needs matching, nonempty block lists".into()));
    }
    let mut s = 0.0;
    for ((x, y), w) in prev.iter().zip(curr).zip(weights) {
        if x.shape() != y.shape() || w.len() != x.shape().0 {
            return Err(Error::Shape { expected: x.shape(), got: y.shape() });
        }
        s += weighted_diff_sq(x, y, w).sqrt();
    }
    Ok(s / prev.len() as f64)
}

/// (1 − α) X + α X̃. Dense if either input is dense.
pub fn convex_update(x: &Plan, x_new: &Plan, alpha: f64) -> Result<Plan> {
    let storage = match (x.storage(), x_new.storage()) {
        (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * (1.0 - alpha) + b * alpha),
        (Storage::Dense(a), Storage::Sparse(b)) => {
            let mut out = a * (1.0 - alpha);
            for (j, k, v) in b.iter() {
                out[(j, k)] += alpha * v;
            }
            Storage::Dense(out)
        }
        (Storage::Sparse(a), Storage::Dense(b)) => {
            let mut out = b * alpha;
            for (j, k, v) in a.iter() {
                out[(j, k)] += (1.0 - alpha) * v;
            }
            Storage::Dense(out)
        }
        (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(sparse_axpby(a, 1.0 - alpha, b, alpha)),
    };
    x.with_storage(storage)
}

fn sparse_axpby(a: &Csr, ca: f64, b: &Csr, cb: f64) -> Csr {
    let (m, n) = a.shape();
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for j in 0..m {
        let (ia, va) = a.row(j);
        let (ib, vb) = b.row(j);
        let (mut p, mut q) = (0, 0);
        while p < ia.len() || q < ib.len() {
            if q == ib.len() || (p < ia.len() && ia[p] < ib[q]) {
                indices.push(ia[p]);
                values.push(ca * va[p]);
                p += 1;
            } else if p == ia.len() || ib[q] < ia[p] {
                indices.push(ib[q]);
                values.push(cb * vb[q]);
                q += 1;
            } else {
                indices.push(ia[p]);
                values.push(ca * va[p] + cb * vb[q]);
                p += 1;
                q += 1;
            }
        }
        indptr.push(indices.len());
    }
    Csr::new(Pattern::new(m, n, indptr, indices).expect("merged rows sorted"), values).expect("lengths match")
}

/// Dense copy of any plan.
pub fn densified(p: &Plan) -> Result<Plan> {
    match p.storage() {
        Storage::Dense(_) => Ok(p.clone()),
        Storage::Sparse(s) => p.with_storage(Storage::Dense(s.to_dense())),
    }
}
