//! Fixtures shared by the criterion benches.

use otbcd::methods::MethodConfig;
use otbcd::mmot::{build_mesh, discretize, system, DiscreteSystem, DiscretizeOptions, MeshStyle, MmotOracle};
use otbcd::polytope::{Marginal, ObjectiveOracle};
use otbcd::{MethodKind, Result};

/// Seeded uniform costs in [0, 1) and strictly positive marginals.
pub fn random_problem(m: usize, n: usize, seed: u64) -> (ndarray::Array2<f64>, Marginal, Marginal) {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let c = ndarray::Array2::from_shape_fn((m, n), |_| next());
    let a = ndarray::Array1::from_shape_fn(m, |_| 0.2 + next());
    let b = ndarray::Array1::from_shape_fn(n, |_| 0.2 + next());
    let (sa, sb) = (a.sum(), b.sum());
    (c, Marginal::new(a / sa).unwrap(), Marginal::new(b / sb).unwrap())
}

/// Catalog system 1 on an equal-mass mesh of `k` elements.
pub fn system_one(k: usize) -> Result<DiscreteSystem> {
    let density = system(1)?;
    discretize(&density, &build_mesh(&density, k, MeshStyle::Equimass)?, &DiscretizeOptions::default())
}

pub fn block_marginals(oracle: &MmotOracle, sys: &DiscreteSystem) -> Vec<(Marginal, Marginal)> {
    let m = sys.marginal();
    vec![(m.clone(), m); oracle.block_count()]
}

/// A short fixed-length run, so timings compare per-iteration cost.
pub fn fixed_run(kind: MethodKind, t_max: usize) -> MethodConfig {
    let mut cfg = MethodConfig::new(kind);
    cfg.t_max = t_max;
    cfg.tol = 0.0;
    cfg
}
