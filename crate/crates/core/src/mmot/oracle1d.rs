//! Exact one-dimensional references built from quantile shifts.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;

use super::density::Density;
use super::quadrature::integrate_pieces;
use super::system::DiscreteSystem;
use crate::error::{Error, Result};
use crate::polytope::{Csr, Pattern, Plan};

/// Orientation of the integrated potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PotentialSign {
    /// v′(r) = −Σ sign(r − f_i) / (r − f_i)², the orientation of the column duals.
    #[default]
    Dual,
    /// v′(r) = +Σ sign(r − f_i) / (r − f_i)².
    Reversed,
}

impl fmt::Display for PotentialSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dual => "dual",
            Self::Reversed => "reversed",
        })
    }
}

impl FromStr for PotentialSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dual" => Ok(Self::Dual),
            "reversed" => Ok(Self::Reversed),
            o => Err(format!("unknown potential sign `{o}` (dual, reversed)")),
        }
    }
}

/// Co-motion functions, optimal value and potential of a 1-D density.
#[derive(Clone, Debug)]
pub struct Oracle1d<'a> {
    density: &'a Density,
    n: usize,
}

impl<'a> Oracle1d<'a> {
    pub fn new(density: &'a Density) -> Result<Self> {
        if density.dim != 1 {
            return Err(Error::Unsupported("analytic references exist in one dimension only".into()));
        }
        Ok(Self { density, n: density.n_electrons })
    }

    pub fn n_electrons(&self) -> usize {
        self.n
    }

    fn shifted_quantile(&self, s: f64, i: usize) -> f64 {
        let q = (s + i as f64 / self.n as f64).rem_euclid(1.0);
        self.density.quantile(q)
    }

    /// f_i(x) = F⁻¹(F(x) + i/N_e mod 1); f_0 is the identity.
    pub fn comotion(&self, i: usize, x: f64) -> f64 {
        if i % self.n == 0 {
            return x;
        }
        self.shifted_quantile(self.density.cdf(x), i)
    }

    /// Interior points where some co-motion function jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        (1..self.n).map(|k| self.density.quantile(k as f64 / self.n as f64)).collect()
    }

    /// Optimal value for unit-mass marginals: ∫₀¹ Σ_{a<b} |Q(s + a/N) − Q(s + b/N)|⁻¹ ds.
    pub fn obj_star(&self, tol: f64) -> f64 {
        // The integrand has period 1/N in s.
        let h = 1.0 / self.n as f64;
        let integrand = |s: f64| {
            let x: Vec<f64> = (0..self.n).map(|i| self.shifted_quantile(s, i)).collect();
            let mut e = 0.0;
            for a in 0..self.n {
                for b in a + 1..self.n {
                    e += 1.0 / (x[a] - x[b]).abs();
                }
            }
            e
        };
        self.n as f64 * integrate_pieces(integrand, &[0.0, h], tol * h)
    }

    /// v′ at r.
    pub fn force(&self, r: f64, sign: PotentialSign) -> f64 {
        let s = match sign {
            PotentialSign::Dual => -1.0,
            PotentialSign::Reversed => 1.0,
        };
        let u = self.density.cdf(r);
        (1..self.n)
            .map(|i| {
                let d = r - self.shifted_quantile(u, i);
                s * d.signum() / (d * d)
            })
            .sum()
    }

    /// Potential at `points`, integrated from the leftmost point and shifted to minimum zero.
    pub fn potential(&self, points: &[f64], sign: PotentialSign, tol: f64) -> Array1<f64> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        let breaks = self.breakpoints();
        let mut v = Array1::zeros(points.len());
        let mut acc = 0.0;
        for w in order.windows(2) {
            let (x0, x1) = (points[w[0]], points[w[1]]);
            let mut knots = vec![x0];
            knots.extend(breaks.iter().copied().filter(|&b| b > x0 && b < x1));
            knots.push(x1);
            acc += integrate_pieces(|r| self.force(r, sign), &knots, tol);
            v[w[1]] = acc;
        }
        let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
        v.mapv(|x| x - min)
    }
}

/// Cyclic-shift couplings of an equal-mass 1-D system.
#[derive(Clone, Debug)]
pub struct DiscreteReference {
    /// Atom indices sorted by position.
    pub order: Vec<usize>,
    pub objective: f64,
    /// Y_i for i = 1..N_e − 1.
    pub plans: Vec<Plan>,
}

/// Shift-by-K/N_e couplings when all masses agree and N_e divides K; `None` otherwise.
pub fn discrete_reference(sys: &DiscreteSystem) -> Result<Option<DiscreteReference>> {
    let k = sys.len();
    let n = sys.n_electrons;
    if sys.dim != 1 || k % n != 0 {
        return Ok(None);
    }
    let m0 = sys.masses[0];
    if sys.masses.iter().any(|&m| (m - m0).abs() > 1e-9 * m0) {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sys.barycenters[(a, 0)].total_cmp(&sys.barycenters[(b, 0)]));
    let step = k / n;
    let image = |p: usize, i: usize| order[(p + i * step) % k];
    let mut objective = 0.0;
    for p in 0..k {
        let mut e = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                e += sys.cost(image(p, a), image(p, b));
            }
        }
        objective += sys.masses[order[p]] * e;
    }
    let marginal = sys.marginal();
    let mut plans = Vec::with_capacity(n - 1);
    for i in 1..n {
        let pairs: Vec<(usize, usize)> = (0..k).map(|p| (order[p], image(p, i))).collect();
        let pattern = Pattern::from_pairs(k, k, &pairs)?;
        let values = pattern.iter().map(|(j, _)| sys.masses[j]).collect();
        plans.push(Plan::sparse(Csr::new(pattern, values)?, marginal.clone(), marginal.clone())?);
    }
    Ok(Some(DiscreteReference { order, objective, plans }))
}
