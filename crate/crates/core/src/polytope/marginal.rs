use ndarray::Array1;

use crate::error::{Error, Result};

/// Nonnegative mass vector; one side of a transport polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    masses: Array1<f64>,
}

impl Marginal {
    pub fn new(masses: impl Into<Array1<f64>>) -> Result<Self> {
        let masses = masses.into();
        if masses.is_empty() {
            return Err(Error::Domain("empty marginal".into()));
        }
        if let Some(x) = masses.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::Domain(format!("marginal entry {x} is not a finite nonnegative mass")));
        }
        if !masses.iter().any(|&x| x > 0.0) {
            return Err(Error::Domain("marginal has no positive entry".into()));
        }
        Ok(Self { masses })
    }

    pub fn uniform(n: usize) -> Self {
        Self { masses: Array1::from_elem(n.max(1), 1.0 / n.max(1) as f64) }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &Array1<f64> {
        &self.masses
    }

    pub fn as_slice(&self) -> &[f64] {
        self.masses.as_slice().expect("contiguous")
    }

    pub fn total(&self) -> f64 {
        self.masses.sum()
    }

    pub fn max(&self) -> f64 {
        self.masses.iter().cloned().fold(0.0, f64::max)
    }

    /// Copy rescaled to unit total mass.
    pub fn normalized(&self) -> Self {
        let s = self.total();
        Self { masses: &self.masses / s }
    }
}

/// Errors unless both marginals carry the same total mass (relative 1e-9).
pub fn check_balanced(a: &Marginal, b: &Marginal) -> Result<()> {
    let (sa, sb) = (a.total(), b.total());
    if (sa - sb).abs() > 1e-9 * sa.max(sb) {
        return Err(Error::MassMismatch { left: sa, right: sb });
    }
    Ok(())
}
