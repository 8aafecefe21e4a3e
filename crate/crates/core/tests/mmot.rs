mod common;

use approx::assert_abs_diff_eq;
use ndarray::{array, Array1, Array2};
use otbcd::methods::{initial_plans, random_feasible_plan};
use otbcd::mmot::quadrature::{gauss_legendre, integrate};
use otbcd::mmot::*;
use otbcd::polytope::{marginal_violation, Csr, ObjectiveOracle, Pattern, Plan};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(rng: &mut impl Rng, k: usize, dim: usize, n_e: usize) -> DiscreteSystem {
    let masses = Array1::from_shape_fn(k, |_| rng.gen_range(0.5..1.5));
    let masses = &masses / masses.sum();
    let points = Array2::from_shape_fn((k, dim), |_| rng.gen_range(-1.0..1.0));
    DiscreteSystem::from_points(masses, points, n_e, 1.0).unwrap()
}

fn feasible_point(sys: &DiscreteSystem, seed: u64) -> Vec<Plan> {
    let m = sys.marginal();
    initial_plans(&vec![(m.clone(), m); sys.n_electrons - 1], seed).unwrap()
}

fn uniform(n_e: usize) -> Density {
    Density::new(vec![Term::Constant { weight: 1.0 }], vec![(0.0, 1.0)], n_e).unwrap()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sys = random_system(&mut rng, 12, 2, 3);
    let oracle = MmotOracle::new(&sys);
    let y = feasible_point(&sys, 3);
    let h = 1e-6;
    for i in 0..2 {
        let g = oracle.block_gradient(i, &y);
        let mut fd = Array2::zeros((12, 12));
        for j in 0..12 {
            for k in 0..12 {
                let bump = |s: f64| {
                    let mut m = y[i].to_dense();
                    m[(j, k)] += s;
                    let mut z = y.clone();
                    z[i] = Plan::dense(m, y[i].row_target().clone(), y[i].col_target().clone()).unwrap();
                    oracle.objective(&z)
                };
                fd[(j, k)] = (bump(h) - bump(-h)) / (2.0 * h);
            }
        }
        let err = (&fd - &g).iter().map(|x| x * x).sum::<f64>().sqrt() / g.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err <= 1e-6, "block {i}: {err}");
    }
}

#[test]
fn objective_is_symmetric_under_block_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sys = random_system(&mut rng, 8, 1, 4);
    let oracle = MmotOracle::new(&sys);
    let y = feasible_point(&sys, 5);
    let f = oracle.objective(&y);
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let z: Vec<Plan> = perm.iter().map(|&p| y[p].clone()).collect();
        assert_abs_diff_eq!(oracle.objective(&z), f, epsilon = 1e-12 * f.abs());
    }
}

#[test]
fn sparse_and_dense_storage_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sys = random_system(&mut rng, 10, 1, 3);
    let oracle = MmotOracle::new(&sys);
    let dense = feasible_point(&sys, 7);
    let m = sys.marginal();
    let sparse: Vec<Plan> = dense
        .iter()
        .map(|p| Plan::sparse(Csr::from_dense(&p.to_dense()), m.clone(), m.clone()).unwrap())
        .collect();
    assert_abs_diff_eq!(oracle.objective(&dense), oracle.objective(&sparse), epsilon = 1e-12);
    let mixed = vec![dense[0].clone(), sparse[1].clone()];
    assert_abs_diff_eq!(oracle.objective(&dense), oracle.objective(&mixed), epsilon = 1e-12);
    for i in 0..2 {
        let g = oracle.block_gradient(i, &dense);
        let gs = oracle.block_gradient(i, &sparse);
        for (x, y) in g.iter().zip(gs.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let pattern = Pattern::from_pairs(10, 10, &[(0, 0), (3, 7), (9, 2), (5, 5)]).unwrap();
        let entries = oracle.block_gradient_entries(i, &sparse, &pattern);
        for (j, k, v) in entries.iter() {
            assert_abs_diff_eq!(v, g[(j, k)], epsilon = 1e-12);
        }
    }
}

fn random_equal_mass(rng: &mut impl Rng, k: usize) -> DiscreteSystem {
    let points = Array2::from_shape_fn((k, 1), |_| rng.gen_range(-1.0..1.0));
    DiscreteSystem::from_points(Array1::from_elem(k, 1.0 / k as f64), points, 3, 1.0).unwrap()
}

#[test]
fn discrete_reference_is_feasible_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sys = random_equal_mass(&mut rng, 12);
    let r = discrete_reference(&sys).unwrap().unwrap();
    for p in &r.plans {
        assert!(marginal_violation(p) < 1e-14);
    }
    let oracle = MmotOracle::new(&sys);
    assert_abs_diff_eq!(oracle.objective(&r.plans), r.objective, epsilon = 1e-12);
    // Not defined when N_e does not divide K.
    assert!(discrete_reference(&random_equal_mass(&mut rng, 10)).unwrap().is_none());
}

#[test]
fn coulomb_cost_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = random_system(&mut rng, 9, 3, 3);
    let c = sys.cost_matrix();
    for k in 0..9 {
        assert_eq!(c[(k, k)], 0.0);
        for l in 0..9 {
            assert_eq!(c[(k, l)], c[(l, k)]);
            if k != l {
                let d: f64 = (0..3).map(|a| (sys.barycenters[(k, a)] - sys.barycenters[(l, a)]).powi(2)).sum();
                assert_abs_diff_eq!(c[(k, l)], 1.0 / d.sqrt(), epsilon = 1e-12 * c[(k, l)]);
            }
        }
    }
}

#[test]
fn lazy_cost_matches_stored_cost() {
    let d = system(2).unwrap();
    let mesh = build_mesh(&d, 60, MeshStyle::Equisize).unwrap();
    let stored = discretize(&d, &mesh, &DiscretizeOptions::default()).unwrap();
    let opts = DiscretizeOptions { dense_cost_limit: 0, ..Default::default() };
    let lazy = discretize(&d, &mesh, &opts).unwrap();
    assert!(stored.dense_cost().is_some() && lazy.dense_cost().is_none());
    assert_eq!(stored.cost_checksum(), lazy.cost_checksum());
    let y = feasible_point(&stored, 1);
    assert_abs_diff_eq!(MmotOracle::new(&stored).objective(&y), MmotOracle::new(&lazy).objective(&y), epsilon = 1e-12);
}

#[test]
fn catalog_systems_build() {
    for id in 1..=SYSTEM_COUNT {
        let d = system(id).unwrap();
        assert!(d.total_mass() > 0.0);
    }
    assert!(system(0).is_err());
    assert!(system(SYSTEM_COUNT + 1).is_err());
}

#[test]
fn box_integral_matches_quadrature() {
    for id in 1..=4 {
        let d = system(id).unwrap();
        let (lo, hi) = d.domain[0];
        let q = integrate(|x| d.eval(&[x]), lo, hi, 1e-13);
        assert_abs_diff_eq!(d.total_mass(), q, epsilon = 1e-10 * q);
    }
    let d = system(5).unwrap();
    let (nodes, weights) = gauss_legendre(40);
    let mut q = 0.0;
    for (x, wx) in nodes.iter().zip(&weights) {
        for (y, wy) in nodes.iter().zip(&weights) {
            q += wx * wy * d.eval(&[0.5 * x, 0.5 * y]) * 0.25;
        }
    }
    assert_abs_diff_eq!(d.box_integral(&[-0.5, -0.5], &[0.5, 0.5]), q, epsilon = 1e-10);
}

#[test]
fn quantile_inverts_cdf() {
    let d = system(2).unwrap();
    for i in 1..100 {
        let s = i as f64 / 100.0;
        assert_abs_diff_eq!(d.cdf(d.quantile(s)), s, epsilon = 1e-13);
    }
}

#[test]
fn equimass_mesh_has_equal_masses() {
    let d = system(1).unwrap();
    let mesh = build_mesh(&d, 90, MeshStyle::Equimass).unwrap();
    let sys = discretize(&d, &mesh, &DiscretizeOptions::default()).unwrap();
    assert_eq!(sys.len(), 90);
    for &m in &sys.masses {
        assert_abs_diff_eq!(m, 1.0 / 90.0, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(sys.raw_masses.sum(), 3.0, epsilon = 1e-12);
    assert!(build_mesh(&system(5).unwrap(), 100, MeshStyle::Equimass).is_err());
}

#[test]
fn equisize_mesh_tiles_the_domain() {
    let d = system(7).unwrap();
    let mesh = build_mesh(&d, 64, MeshStyle::Equisize).unwrap();
    let vol: f64 = mesh.cells.iter().map(|c| c.volume()).sum();
    assert_abs_diff_eq!(vol, 64.0, epsilon = 1e-12);
    assert!(mesh.cells.iter().all(|c| (c.volume() - 1.0).abs() < 1e-12));
    assert!(build_mesh(&d, 65, MeshStyle::Equisize).is_err());
}

#[test]
fn refinement_nests_children_in_parents() {
    for (id, k, style) in [(1, 30, MeshStyle::Equimass), (2, 30, MeshStyle::Equisize), (5, 100, MeshStyle::Equisize)] {
        let d = system(id).unwrap();
        let coarse = build_mesh(&d, k, style).unwrap();
        let fine = refine(&coarse, &d).unwrap();
        assert_eq!(fine.len(), coarse.len() << d.dim);
        let parents = fine.parents.as_ref().unwrap();
        for (c, &p) in fine.cells.iter().zip(parents) {
            assert!(coarse.cells[p].contains(&c.barycenter()));
        }
        let mut counts = vec![0; coarse.len()];
        for &p in parents {
            counts[p] += 1;
        }
        assert!(counts.iter().all(|&n| n == 1 << d.dim));
        // Children carry exactly their parent's mass.
        for (p, cell) in coarse.cells.iter().enumerate() {
            let m: f64 = fine.cells.iter().zip(parents).filter(|(_, &q)| q == p).map(|(c, _)| d.box_integral(&c.lo, &c.hi)).sum();
            assert_abs_diff_eq!(m, d.box_integral(&cell.lo, &cell.hi), epsilon = 1e-12);
        }
    }
}

#[test]
fn truncation_threshold_is_monotone() {
    let d = system(5).unwrap();
    let mesh = build_mesh(&d, 400, MeshStyle::Equisize).unwrap();
    let mut prev: Option<Vec<usize>> = None;
    for threshold in [0.0, 1e-4, 1e-3, 1e-2, 1e-1] {
        let opts = DiscretizeOptions { threshold, ..Default::default() };
        let sys = discretize(&d, &mesh, &opts).unwrap();
        assert_abs_diff_eq!(sys.masses.sum(), 1.0, epsilon = 1e-12);
        if let Some(p) = &prev {
            assert!(sys.kept.iter().all(|k| p.contains(k)));
            assert!(sys.kept.len() <= p.len());
        }
        prev = Some(sys.kept.clone());
    }
    let opts = DiscretizeOptions { threshold: 2.0, ..Default::default() };
    assert!(matches!(discretize(&d, &mesh, &opts), Err(otbcd::Error::EmptyTruncation)));
    let opts = DiscretizeOptions { normalization: Normalization::Electrons, ..Default::default() };
    assert_abs_diff_eq!(discretize(&d, &mesh, &opts).unwrap().masses.sum(), 3.0, epsilon = 1e-12);
}

#[test]
fn uniform_two_electron_comotion_is_half_shift() {
    let d = uniform(2);
    let o = Oracle1d::new(&d).unwrap();
    let k = 64;
    for j in 0..k {
        let x = d.quantile(j as f64 / k as f64);
        assert_eq!(o.comotion(1, x), (x + 0.5).rem_euclid(1.0));
        assert_eq!(o.comotion(0, x), x);
    }
    // Each electron pair sits at distance 1/2.
    assert_abs_diff_eq!(o.obj_star(1e-12), 2.0, epsilon = 1e-10);
}

#[test]
fn comotion_functions_form_a_cyclic_group() {
    let d = system(2).unwrap();
    let o = Oracle1d::new(&d).unwrap();
    for i in 1..=20 {
        let x = -1.4 + 0.14 * i as f64;
        assert_abs_diff_eq!(o.comotion(1, o.comotion(1, x)), o.comotion(2, x), epsilon = 1e-10);
        assert_abs_diff_eq!(o.comotion(1, o.comotion(2, x)), x, epsilon = 1e-10);
    }
}

#[test]
fn comotion_preserves_the_density() {
    let d = system(2).unwrap();
    let o = Oracle1d::new(&d).unwrap();
    // Stratified sample of ρ, pushed forward by f_1 and f_2; 3 | n keeps the
    // shifted nodes on the sample grid.
    let n = 999;
    let xs: Vec<f64> = (0..n).map(|i| d.quantile((i as f64 + 0.5) / n as f64)).collect();
    for i in 1..3 {
        let mut img: Vec<f64> = xs.iter().map(|&x| o.comotion(i, x)).collect();
        img.sort_by(f64::total_cmp);
        // Empirical CDF of the images against F.
        let worst = img.iter().enumerate().map(|(r, &y)| (d.cdf(y) - (r as f64 + 0.5) / n as f64).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-9, "f_{i}: {worst}");
    }
}

#[test]
fn oracle_needs_one_dimension() {
    assert!(matches!(Oracle1d::new(&system(5).unwrap()), Err(otbcd::Error::Unsupported(_))));
}

#[test]
fn potential_sign_conventions_are_mirror_images() {
    let d = system(1).unwrap();
    let o = Oracle1d::new(&d).unwrap();
    let pts: Vec<f64> = (0..40).map(|i| -0.975 + 0.05 * i as f64).collect();
    let v = o.potential(&pts, PotentialSign::Dual, 1e-10);
    assert_eq!(v.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
    for &r in &pts {
        assert_abs_diff_eq!(o.force(r, PotentialSign::Dual), -o.force(r, PotentialSign::Reversed), epsilon = 1e-12);
    }
    // A symmetric density gives a symmetric potential.
    for i in 0..20 {
        assert_abs_diff_eq!(v[i], v[39 - i], epsilon = 1e-6);
    }
    assert_eq!("reversed".parse::<PotentialSign>().unwrap(), PotentialSign::Reversed);
}

#[test]
fn error_metric_examples() {
    let v = array![0.0, 1.0, 2.0];
    assert_eq!(error_metrics(2.0, 2.0, &v, &v).unwrap(), (0.0, 0.0));
    let (eo, es) = error_metrics(1.1, 1.0, &array![0.0, 1.0, 1.0], &v).unwrap();
    assert_abs_diff_eq!(eo, 0.1, epsilon = 1e-12);
    assert_abs_diff_eq!(es, 0.5, epsilon = 1e-12);
    assert!(error_metrics(1.0, 0.0, &v, &v).is_err());
    assert!(error_metrics(1.0, 1.0, &v, &array![0.0, 0.0, 0.0]).is_err());
}

#[test]
fn sce_potential_examples() {
    assert_eq!(sce_potential(&[array![1.0, 2.0, 3.0]]).unwrap(), array![0.0, 1.0, 2.0]);
    assert_eq!(sce_potential(&[array![1.0, 0.0], array![3.0, 0.0]]).unwrap(), array![2.0, 0.0]);
    assert!(sce_potential(&[]).is_err());
    assert!(sce_potential(&[array![1.0], array![1.0, 2.0]]).is_err());
}

#[test]
fn ot_map_of_identity_coupling_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sys = random_system(&mut rng, 7, 2, 3);
    let m = sys.marginal();
    let id = Plan::dense(Array2::from_diag(&sys.masses), m.clone(), m).unwrap();
    let pts = ot_map(&id, &sys).unwrap();
    assert_eq!(pts.len(), 7);
    for p in &pts {
        for (a, b) in p.source.iter().zip(&p.image) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }
    let inside = restrict_map(&pts, &[0.0, -1.0], &[1.0, 1.0]);
    assert!(inside.iter().all(|p| p.source[0] >= 0.0));
    assert_eq!(inside.len(), pts.iter().filter(|p| p.source[0] >= 0.0).count());
}

#[test]
fn ot_map_of_shift_coupling_follows_the_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sys = random_equal_mass(&mut rng, 9);
    let r = discrete_reference(&sys).unwrap().unwrap();
    let pts = ot_map(&r.plans[0], &sys).unwrap();
    for (pos, &j) in r.order.iter().enumerate() {
        let target = r.order[(pos + 3) % 9];
        let p = pts.iter().find(|p| p.index == j).unwrap();
        assert_abs_diff_eq!(p.image[0], sys.barycenters[(target, 0)], epsilon = 1e-14);
    }
}

#[test]
fn density_validation() {
    assert!(Density::new(vec![], vec![(0.0, 1.0)], 2).is_err());
    assert!(Density::new(vec![Term::Constant { weight: 1.0 }], vec![(1.0, 0.0)], 2).is_err());
    assert!(Density::new(vec![Term::Constant { weight: 1.0 }], vec![(0.0, 1.0); 4], 2).is_err());
    assert!(Density::new(vec![Term::Constant { weight: 1.0 }], vec![(0.0, 1.0)], 1).is_err());
    let g = Term::Gaussian { weight: 1.0, alpha: 1.0, center: vec![0.0, 0.0] };
    assert!(Density::new(vec![g], vec![(0.0, 1.0)], 2).is_err());
    assert!(Density::new(vec![Term::CosineBump { weight: 1.0 }], vec![(0.0, 1.0); 2], 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn objective_is_positive_on_feasible_points(seed in 0u64..10_000, k in 3usize..10, n_e in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_system(&mut rng, k, 2, n_e);
        let m = sys.marginal();
        let y: Vec<Plan> = (0..n_e - 1).map(|_| random_feasible_plan(&m, &m, &mut rng).unwrap()).collect();
        prop_assert!(MmotOracle::new(&sys).objective(&y) > 0.0);
    }

    #[test]
    fn cost_checksum_is_deterministic(seed in 0u64..10_000) {
        let mut r1 = ChaCha8Rng::seed_from_u64(seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(random_system(&mut r1, 6, 1, 2).cost_checksum(), random_system(&mut r2, 6, 1, 2).cost_checksum());
    }
}
