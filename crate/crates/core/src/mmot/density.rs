use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One additive term of a single-particle density.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// weight · exp(−α‖r − c‖²).
    Gaussian { weight: f64, alpha: f64, center: Vec<f64> },
    /// weight · (cos(πr) + 1), one-dimensional.
    CosineBump { weight: f64 },
    /// weight on the whole domain.
    Constant { weight: f64 },
}

/// Unnormalized density on an axis-aligned box with an electron count.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pub dim: usize,
    pub terms: Vec<Term>,
    pub domain: Vec<(f64, f64)>,
    pub n_electrons: usize,
}

fn erf_diff(x0: f64, x1: f64) -> f64 {
    // erf(x1) − erf(x0), via erfc in the tails to keep relative accuracy.
    if x0 >= 0.0 {
        libm::erfc(x0) - libm::erfc(x1)
    } else if x1 <= 0.0 {
        libm::erfc(-x1) - libm::erfc(-x0)
    } else {
        libm::erf(x1) - libm::erf(x0)
    }
}

impl Density {
    pub fn new(terms: Vec<Term>, domain: Vec<(f64, f64)>, n_electrons: usize) -> Result<Self> {
        let dim = domain.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("dimension {dim} not in 1..=3")));
        }
        if terms.is_empty() {
            return Err(Error::Domain("density has no terms".into()));
        }
        if n_electrons < 2 {
            return Err(Error::Domain("need at least two electrons".into()));
        }
        for (lo, hi) in &domain {
            if !(lo < hi) {
                return Err(Error::Domain(format!("domain interval [{lo}, {hi}] is empty")));
            }
        }
        for t in &terms {
            match t {
                Term::Gaussian { weight, alpha, center } => {
                    if !(*weight > 0.0) || !(*alpha > 0.0) {
                        return Err(Error::Domain("gaussian weight and decay must be positive".into()));
                    }
                    if center.len() != dim {
                        return Err(Error::Domain(format!("gaussian center has {} coordinates, domain has {dim}", center.len())));
                    }
                }
                Term::CosineBump { weight } => {
                    if dim != 1 || !(*weight > 0.0) {
                        return Err(Error::Domain("cosine term needs d = 1 and positive weight".into()));
                    }
                }
                Term::Constant { weight } => {
                    if !(*weight > 0.0) {
                        return Err(Error::Domain("constant term needs positive weight".into()));
                    }
                }
            }
        }
        Ok(Self { dim, terms, domain, n_electrons })
    }

    pub fn eval(&self, r: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Gaussian { weight, alpha, center } => {
                    let d2: f64 = r.iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
                    weight * (-alpha * d2).exp()
                }
                Term::CosineBump { weight } => weight * ((PI * r[0]).cos() + 1.0),
                Term::Constant { weight } => *weight,
            })
            .sum()
    }

    /// ∫ ρ over the box [lo, hi], in closed form.
    pub fn box_integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Gaussian { weight, alpha, center } => {
                    let s = alpha.sqrt();
                    let mut p = *weight;
                    for d in 0..self.dim {
                        p *= 0.5 * (PI / alpha).sqrt() * erf_diff(s * (lo[d] - center[d]), s * (hi[d] - center[d]));
                    }
                    p
                }
                Term::CosineBump { weight } => {
                    let prim = |x: f64| (PI * x).sin() / PI + x;
                    weight * (prim(hi[0]) - prim(lo[0]))
                }
                Term::Constant { weight } => weight * lo.iter().zip(hi).map(|(a, b)| b - a).product::<f64>(),
            })
            .sum()
    }

    /// Mass over the whole domain.
    pub fn total_mass(&self) -> f64 {
        let lo: Vec<f64> = self.domain.iter().map(|d| d.0).collect();
        let hi: Vec<f64> = self.domain.iter().map(|d| d.1).collect();
        self.box_integral(&lo, &hi)
    }

    /// Normalized cumulative distribution on the 1-D domain.
    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain[0];
        let x = x.clamp(lo, hi);
        (self.box_integral(&[lo], &[x]) / self.total_mass()).clamp(0.0, 1.0)
    }

    /// Inverse of [`Density::cdf`] by safeguarded Newton, 1-D only.
    pub fn quantile(&self, s: f64) -> f64 {
        let (lo, hi) = self.domain[0];
        if s <= 0.0 {
            return lo;
        }
        if s >= 1.0 {
            return hi;
        }
        let total = self.total_mass();
        let (mut a, mut b) = (lo, hi);
        let mut x = lo + s * (hi - lo);
        for _ in 0..200 {
            let f = self.box_integral(&[lo], &[x]) / total - s;
            if f == 0.0 {
                return x;
            }
            if f > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let d = self.eval(&[x]) / total;
            let mut next = if d > 0.0 { x - f / d } else { 0.5 * (a + b) };
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || b - a <= 1e-15 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }
}
