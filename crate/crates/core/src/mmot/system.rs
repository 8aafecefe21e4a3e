use std::fmt;

use ndarray::{Array1, Array2};

use super::density::Density;
use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::polytope::Marginal;

/// Total mass carried by ϱ on each side of U(ϱ,ϱ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Normalization {
    /// ϱ sums to 1.
    #[default]
    Unit,
    /// ϱ sums to N_e.
    Electrons,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Unit => "unit",
            Self::Electrons => "electrons",
        })
    }
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unit" => Ok(Self::Unit),
            "electrons" => Ok(Self::Electrons),
            o => Err(format!("unknown normalization `{o}` (unit, electrons)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscretizeOptions {
    /// Elements with ϱ_k below threshold · max ϱ are dropped.
    pub threshold: f64,
    pub beta: f64,
    pub normalization: Normalization,
    /// Largest K_trunc for which C is stored densely.
    pub dense_cost_limit: usize,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        Self { threshold: 1e-3, beta: 1.0, normalization: Normalization::Unit, dense_cost_limit: 8192 }
    }
}

/// Truncated, normalized discretization of one system.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    pub n_electrons: usize,
    pub dim: usize,
    /// ϱ after truncation and normalization.
    pub masses: Array1<f64>,
    /// Element masses before truncation, scaled so the domain holds N_e.
    pub raw_masses: Array1<f64>,
    /// Mesh indices of the surviving elements.
    pub kept: Vec<usize>,
    /// K_trunc × d barycenters.
    pub barycenters: Array2<f64>,
    cost: Option<Array2<f64>>,
    pub beta: f64,
    pub normalization: Normalization,
    pub threshold: f64,
}

impl DiscreteSystem {
    /// Builds a system directly from masses and points (no mesh).
    pub fn from_points(masses: Array1<f64>, barycenters: Array2<f64>, n_electrons: usize, beta: f64) -> Result<Self> {
        let k = masses.len();
        if barycenters.nrows() != k {
            return Err(Error::Shape { expected: (k, barycenters.ncols()), got: barycenters.dim() });
        }
        if masses.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("masses must be positive".into()));
        }
        let mut s = Self {
            n_electrons,
            dim: barycenters.ncols(),
            raw_masses: masses.clone(),
            masses,
            kept: (0..k).collect(),
            barycenters,
            cost: None,
            beta,
            normalization: Normalization::Unit,
            threshold: 0.0,
        };
        s.cost = Some(s.build_cost());
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn marginal(&self) -> Marginal {
        Marginal::new(self.masses.clone()).expect("positive masses")
    }

    /// c_kl = ‖d_k − d_l‖⁻¹, c_kk = 0.
    pub fn cost(&self, k: usize, l: usize) -> f64 {
        if let Some(c) = &self.cost {
            return c[(k, l)];
        }
        self.cost_direct(k, l)
    }

    fn cost_direct(&self, k: usize, l: usize) -> f64 {
        if k == l {
            return 0.0;
        }
        let d2: f64 = self.barycenters.row(k).iter().zip(self.barycenters.row(l)).map(|(a, b)| (a - b) * (a - b)).sum();
        1.0 / d2.sqrt()
    }

    fn build_cost(&self) -> Array2<f64> {
        let k = self.len();
        Array2::from_shape_fn((k, k), |(a, b)| self.cost_direct(a, b))
    }

    pub fn dense_cost(&self) -> Option<&Array2<f64>> {
        self.cost.as_ref()
    }

    /// Dense C, materialized if it was not stored.
    pub fn cost_matrix(&self) -> Array2<f64> {
        self.cost.clone().unwrap_or_else(|| self.build_cost())
    }

    /// FNV-style checksum over the cost entries.
    pub fn cost_checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for k in 0..self.len() {
            for l in 0..self.len() {
                h ^= self.cost(k, l).to_bits();
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// ϱ_k = ∫_{e_k} ρ (scaled to N_e over the domain), truncation, then normalization.
pub fn discretize(density: &Density, mesh: &Mesh, opts: &DiscretizeOptions) -> Result<DiscreteSystem> {
    discretize_masked(density, mesh, opts, None)
}

/// As [`discretize`], additionally dropping elements with `allowed[k] == false`.
pub fn discretize_masked(density: &Density, mesh: &Mesh, opts: &DiscretizeOptions, allowed: Option<&[bool]>) -> Result<DiscreteSystem> {
    if mesh.dim != density.dim {
        return Err(Error::Domain("mesh and density dimensions differ".into()));
    }
    if !(opts.threshold >= 0.0) {
        return Err(Error::Domain("threshold must be nonnegative".into()));
    }
    let scale = density.n_electrons as f64 / density.total_mass();
    let raw = Array1::from_iter(mesh.cells.iter().map(|c| density.box_integral(&c.lo, &c.hi).max(0.0) * scale));
    let max = raw.iter().cloned().fold(0.0, f64::max);
    let cut = opts.threshold * max;
    let kept: Vec<usize> = (0..raw.len())
        .filter(|&k| raw[k] > 0.0 && raw[k] >= cut && allowed.is_none_or(|a| a[k]))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyTruncation);
    }
    let kept_mass: f64 = kept.iter().map(|&k| raw[k]).sum();
    let target = match opts.normalization {
        Normalization::Unit => 1.0,
        Normalization::Electrons => density.n_electrons as f64,
    };
    let masses = Array1::from_iter(kept.iter().map(|&k| raw[k] * target / kept_mass));
    let barycenters = Array2::from_shape_fn((kept.len(), density.dim), |(i, d)| {
        let c = &mesh.cells[kept[i]];
        0.5 * (c.lo[d] + c.hi[d])
    });
    let mut sys = DiscreteSystem {
        n_electrons: density.n_electrons,
        dim: density.dim,
        masses,
        raw_masses: raw,
        kept,
        barycenters,
        cost: None,
        beta: opts.beta,
        normalization: opts.normalization,
        threshold: opts.threshold,
    };
    if sys.len() <= opts.dense_cost_limit {
        sys.cost = Some(sys.build_cost());
    }
    Ok(sys)
}
