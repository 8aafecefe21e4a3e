use ndarray::{Array1, Array2};

use super::csr::{Csr, Pattern};
use super::marginal::Marginal;
use crate::error::{Error, Result};

/// Plan storage. Never converted implicitly.
#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(Array2<f64>),
    Sparse(Csr),
}

/// Coupling matrix with its row and column targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    storage: Storage,
    row_target: Marginal,
    col_target: Marginal,
}

impl Plan {
    pub fn new(storage: Storage, row_target: Marginal, col_target: Marginal) -> Result<Self> {
        let shape = match &storage {
            Storage::Dense(m) => m.dim(),
            Storage::Sparse(s) => s.shape(),
        };
        let expected = (row_target.len(), col_target.len());
        if shape != expected {
            return Err(Error::Shape { expected, got: shape });
        }
        let bad = match &storage {
            Storage::Dense(m) => m.iter().any(|x| !(*x >= 0.0) || !x.is_finite()),
            Storage::Sparse(s) => s.values().iter().any(|x| !(*x >= 0.0) || !x.is_finite()),
        };
        if bad {
            return Err(Error::Domain("plan entries must be finite and nonnegative".into()));
        }
        Ok(Self { storage, row_target, col_target })
    }

    pub fn dense(m: Array2<f64>, row_target: Marginal, col_target: Marginal) -> Result<Self> {
        Self::new(Storage::Dense(m), row_target, col_target)
    }

    pub fn sparse(m: Csr, row_target: Marginal, col_target: Marginal) -> Result<Self> {
        Self::new(Storage::Sparse(m), row_target, col_target)
    }

    /// Product coupling a bᵀ scaled to the row mass.
    pub fn product(a: &Marginal, b: &Marginal) -> Self {
        let sb = b.total();
        let m = Array2::from_shape_fn((a.len(), b.len()), |(j, k)| a.masses()[j] * b.masses()[k] / sb);
        Self { storage: Storage::Dense(m), row_target: a.clone(), col_target: b.clone() }
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn into_storage(self) -> Storage {
        self.storage
    }

    pub fn row_target(&self) -> &Marginal {
        &self.row_target
    }

    pub fn col_target(&self) -> &Marginal {
        &self.col_target
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_target.len(), self.col_target.len())
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(j, k)],
            Storage::Sparse(s) => s.get(j, k),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    pub fn as_dense(&self) -> Option<&Array2<f64>> {
        match &self.storage {
            Storage::Dense(m) => Some(m),
            Storage::Sparse(_) => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&Csr> {
        match &self.storage {
            Storage::Sparse(s) => Some(s),
            Storage::Dense(_) => None,
        }
    }

    pub fn row_sums(&self) -> Array1<f64> {
        match &self.storage {
            Storage::Dense(m) => m.sum_axis(ndarray::Axis(1)),
            Storage::Sparse(s) => s.row_sums(),
        }
    }

    pub fn col_sums(&self) -> Array1<f64> {
        match &self.storage {
            Storage::Dense(m) => m.sum_axis(ndarray::Axis(0)),
            Storage::Sparse(s) => s.col_sums(),
        }
    }

    pub fn total(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.sum(),
            Storage::Sparse(s) => s.sum(),
        }
    }

    /// Number of strictly positive entries.
    pub fn support_size(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.iter().filter(|&&x| x > 0.0).count(),
            Storage::Sparse(s) => s.values().iter().filter(|&&x| x > 0.0).count(),
        }
    }

    /// Pattern of strictly positive entries.
    pub fn support(&self) -> Pattern {
        let (m, n) = self.shape();
        let pairs: Vec<(usize, usize)> = match &self.storage {
            Storage::Dense(d) => d.indexed_iter().filter(|(_, &x)| x > 0.0).map(|(ix, _)| ix).collect(),
            Storage::Sparse(s) => s.iter().filter(|t| t.2 > 0.0).map(|t| (t.0, t.1)).collect(),
        };
        Pattern::from_pairs(m, n, &pairs).expect("indices in range")
    }

    /// Frobenius inner product with a dense matrix.
    pub fn dot(&self, w: &Array2<f64>) -> f64 {
        match &self.storage {
            Storage::Dense(m) => (m * w).sum(),
            Storage::Sparse(s) => s.iter().map(|(j, k, v)| v * w[(j, k)]).sum(),
        }
    }

    /// Frobenius inner product with an entry function, touching stored entries only.
    pub fn dot_fn(&self, w: impl Fn(usize, usize) -> f64) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.indexed_iter().filter(|(_, &x)| x != 0.0).map(|((j, k), &x)| x * w(j, k)).sum(),
            Storage::Sparse(s) => s.iter().filter(|t| t.2 != 0.0).map(|(j, k, v)| v * w(j, k)).sum(),
        }
    }

    /// Iterates stored entries as (row, col, value); dense plans yield every entry.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        match &self.storage {
            Storage::Dense(m) => Box::new(m.indexed_iter().map(|((j, k), &x)| (j, k, x))),
            Storage::Sparse(s) => Box::new(s.iter()),
        }
    }

    /// Same targets, new storage.
    pub fn with_storage(&self, storage: Storage) -> Result<Self> {
        Self::new(storage, self.row_target.clone(), self.col_target.clone())
    }
}
