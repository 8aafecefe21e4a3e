mod common;

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use ndarray::{array, Array2};
use otbcd::polytope::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_marginal, random_matrix};

/// Minimum of ⟨W,T⟩ over every basic feasible solution of U(a,b).
fn brute_force_lp(w: &Array2<f64>, a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = w.dim();
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|j| (0..n).map(move |k| (j, k))).collect();
    let r = m + n - 1;
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; r];
    fn next(pick: &mut [usize], total: usize) -> bool {
        let r = pick.len();
        for i in (0..r).rev() {
            if pick[i] < total - r + i {
                pick[i] += 1;
                for q in i + 1..r {
                    pick[q] = pick[q - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, p) in pick.iter_mut().enumerate() {
        *p = i;
    }
    loop {
        // Rows: m row constraints and the first n−1 column constraints.
        let mut mat = DMatrix::<f64>::zeros(r, r);
        for (c, &idx) in pick.iter().enumerate() {
            let (j, k) = cells[idx];
            mat[(j, c)] = 1.0;
            if k + 1 < n {
                mat[(m + k, c)] = 1.0;
            }
        }
        let rhs = DVector::from_iterator(r, a.iter().cloned().chain(b[..n - 1].iter().cloned()));
        if mat.determinant().abs() > 1e-9 {
            if let Some(x) = mat.lu().solve(&rhs) {
                if x.iter().all(|&v| v >= -1e-12) {
                    let val: f64 = pick.iter().zip(x.iter()).map(|(&idx, &v)| w[cells[idx]] * v).sum();
                    best = best.min(val);
                }
            }
        }
        if !next(&mut pick, cells.len()) {
            break;
        }
    }
    best
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..60 {
        let m = 1 + trial % 3;
        let n = 1 + (trial / 3) % 3;
        let a = random_marginal(&mut rng, m);
        let b = random_marginal(&mut rng, n);
        let w = random_matrix(&mut rng, m, n);
        let (plan, value) = transport_lp(&w, &a, &b).unwrap();
        let brute = brute_force_lp(&w, a.as_slice(), b.as_slice());
        assert_abs_diff_eq!(value, brute, epsilon = 1e-10);
        assert!(marginal_violation(&plan) < 1e-12);
        assert_abs_diff_eq!(plan.dot(&w), value, epsilon = 1e-12);
    }
}

#[test]
fn lp_duals_certify_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = random_marginal(&mut rng, 7);
        let b = random_marginal(&mut rng, 9);
        let w = random_matrix(&mut rng, 7, 9);
        let s = transport_lp_detailed(&w, &a, &b).unwrap();
        for j in 0..7 {
            for k in 0..9 {
                assert!(s.u[j] + s.v[k] <= w[(j, k)] + 1e-10);
            }
        }
        let dual = s.u.dot(a.masses()) + s.v.dot(b.masses());
        assert_abs_diff_eq!(dual, s.value, epsilon = 1e-10);
    }
}

#[test]
fn lp_handles_degenerate_marginals() {
    let a = Marginal::new(array![0.5, 0.5]).unwrap();
    let w = array![[0.0, 1.0], [1.0, 0.0]];
    let (p, v) = transport_lp(&w, &a, &a).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(p.get(0, 0), 0.5);
    let b = Marginal::new(array![0.25, 0.25, 0.25, 0.25]).unwrap();
    let w = Array2::zeros((4, 4));
    let (_, v) = transport_lp(&w, &b, &b).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn lp_rejects_unbalanced_and_misshaped_input() {
    let a = Marginal::new(array![0.5, 0.5]).unwrap();
    let b = Marginal::new(array![1.0, 1.0]).unwrap();
    assert!(matches!(transport_lp(&Array2::zeros((2, 2)), &a, &b), Err(otbcd::Error::MassMismatch { .. })));
    assert!(matches!(transport_lp(&Array2::zeros((2, 3)), &a, &a), Err(otbcd::Error::Shape { .. })));
}

#[test]
fn marginal_validation() {
    assert!(Marginal::new(array![0.0, 0.0]).is_err());
    assert!(Marginal::new(array![1.0, -0.1]).is_err());
    assert!(Marginal::new(array![1.0, f64::NAN]).is_err());
    assert!(Marginal::new(ndarray::Array1::<f64>::zeros(0)).is_err());
    assert_abs_diff_eq!(Marginal::uniform(4).total(), 1.0, epsilon = 1e-15);
}

#[test]
fn entropy_values() {
    assert_eq!(neg_entropy(&Array2::zeros((2, 2))).unwrap(), 0.0);
    let t = array![[1.0]];
    assert_eq!(neg_entropy(&t).unwrap(), -1.0);
    assert!(neg_entropy(&array![[-1.0]]).is_err());
    let a = Marginal::new(array![0.3, 0.7]).unwrap();
    let b = Marginal::new(array![0.1, 0.4, 0.5]).unwrap();
    let p = Plan::product(&a, &b);
    assert_abs_diff_eq!(product_neg_entropy(&a, &b), neg_entropy(&p.to_dense()).unwrap(), epsilon = 1e-15);
    assert_abs_diff_eq!(plan_neg_entropy(&p), neg_entropy(&p.to_dense()).unwrap(), epsilon = 1e-15);
}

#[test]
fn kl_edge_cases() {
    let t = array![[0.2, 0.3], [0.1, 0.4]];
    assert_abs_diff_eq!(kl_divergence(&t, &t).unwrap(), 0.0, epsilon = 1e-15);
    assert_eq!(kl_divergence(&array![[1.0, 0.0]], &array![[0.0, 1.0]]).unwrap(), f64::INFINITY);
    assert_eq!(kl_divergence(&array![[0.0]], &array![[0.5]]).unwrap(), 0.5);
    assert!(kl_divergence(&array![[1.0]], &array![[1.0, 2.0]]).is_err());
}

#[test]
fn diameter_bound_covers_vertex_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let a = random_marginal(&mut rng, 5);
        let b = random_marginal(&mut rng, 6);
        let d = diameter_bound(&a, &b).unwrap();
        let (p, _) = transport_lp(&random_matrix(&mut rng, 5, 6), &a, &b).unwrap();
        let (q, _) = transport_lp(&random_matrix(&mut rng, 5, 6), &a, &b).unwrap();
        let diff = p.to_dense() - q.to_dense();
        assert!(diff.iter().map(|x| x * x).sum::<f64>().sqrt() <= 2.0 * d + 1e-12);
    }
}

#[test]
fn residual_vanishes_at_lp_optimum_of_linear_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_marginal(&mut rng, 6);
    let b = random_marginal(&mut rng, 4);
    let w = random_matrix(&mut rng, 6, 4);
    let oracle = common::Linear { w: vec![w.clone()] };
    let (p, _) = transport_lp(&w, &a, &b).unwrap();
    let (_, total) = residual(&[p], &oracle).unwrap();
    assert_abs_diff_eq!(total, 0.0, epsilon = 1e-12);
    let (_, total) = residual(&[Plan::product(&a, &b)], &oracle).unwrap();
    assert!(total > 0.0);
    let bad = Plan::dense(Array2::zeros((6, 4)), a, b).unwrap();
    assert!(matches!(residual(&[bad], &oracle), Err(otbcd::Error::InfeasiblePlan { .. })));
}

#[test]
fn plan_io_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_marginal(&mut rng, 4);
    let b = random_marginal(&mut rng, 3);
    let (p, _) = transport_lp(&random_matrix(&mut rng, 4, 3), &a, &b).unwrap();
    let mut buf = Vec::new();
    write_plan(&p, &mut buf).unwrap();
    let q = read_plan(&buf[..], a.clone(), b.clone()).unwrap();
    assert_eq!(p.to_dense(), q.to_dense());
    let mut buf = Vec::new();
    write_marginal(&a, &mut buf).unwrap();
    assert_eq!(read_marginal(&buf[..]).unwrap(), a);
}

#[test]
fn csr_pattern_queries() {
    let p = Pattern::from_pairs(3, 3, &[(2, 0), (0, 1), (0, 0), (2, 2)]).unwrap();
    assert_eq!(p.nnz(), 4);
    assert_eq!(p.row(0), &[0, 1]);
    assert!(p.contains(2, 2) && !p.contains(1, 1));
    assert!(p.is_subset_of(&Pattern::full(3, 3)));
    assert!(!Pattern::full(3, 3).is_subset_of(&p));
    let m = array![[1.0, 0.0, 2.0], [0.0, 0.0, 0.0], [3.0, 4.0, 0.0]];
    let s = Csr::from_dense(&m);
    assert_eq!(s.to_dense(), m);
    assert_eq!(s.row_sums(), array![3.0, 0.0, 7.0]);
    assert_eq!(s.col_sums(), array![4.0, 4.0, 2.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kl_is_nonnegative(seed in 0u64..10_000, m in 1usize..6, n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_matrix(&mut rng, m, n);
        let r = random_matrix(&mut rng, m, n) + 1e-3;
        prop_assert!(kl_divergence(&t, &r).unwrap() >= -1e-12);
    }

    #[test]
    fn lp_is_below_product_coupling(seed in 0u64..10_000, m in 1usize..8, n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_marginal(&mut rng, m);
        let b = random_marginal(&mut rng, n);
        let w = random_matrix(&mut rng, m, n);
        let (p, v) = transport_lp(&w, &a, &b).unwrap();
        prop_assert!(marginal_violation(&p) < 1e-12);
        prop_assert!(v <= Plan::product(&a, &b).dot(&w) + 1e-12);
        // A vertex of U(a,b) has at most m+n−1 positive entries.
        prop_assert!(p.entries().filter(|e| e.2 > 0.0).count() <= m + n - 1);
    }

    #[test]
    fn product_plan_is_feasible(seed in 0u64..10_000, m in 1usize..10, n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_marginal(&mut rng, m);
        let b = random_marginal(&mut rng, n);
        prop_assert!(marginal_violation(&Plan::product(&a, &b)) < 1e-14);
    }
}
