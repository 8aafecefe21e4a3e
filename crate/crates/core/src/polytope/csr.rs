use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// Row-compressed sparsity pattern with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl Pattern {
    pub fn new(nrows: usize, ncols: usize, indptr: Vec<usize>, indices: Vec<usize>) -> Result<Self> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 || *indptr.last().unwrap() != indices.len() {
            return Err(Error::Domain("malformed row pointer".into()));
        }
        for j in 0..nrows {
            let row = &indices[indptr[j]..indptr[j + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.last().is_some_and(|&k| k >= ncols) {
                return Err(Error::Domain(format!("row {j}: column indices not strictly increasing or out of range")));
            }
        }
        Ok(Self { nrows, ncols, indptr, indices })
    }

    /// Builds from (row, col) pairs; duplicates are merged.
    pub fn from_pairs(nrows: usize, ncols: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nrows];
        for &(j, k) in pairs {
            if j >= nrows || k >= ncols {
                return Err(Error::Domain(format!("index ({j},{k}) outside {nrows}x{ncols}")));
            }
            rows[j].push(k);
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(pairs.len());
        indptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            indices.extend(r);
            indptr.push(indices.len());
        }
        Ok(Self { nrows, ncols, indptr, indices })
    }

    pub fn full(nrows: usize, ncols: usize) -> Self {
        let indptr = (0..=nrows).map(|j| j * ncols).collect();
        let indices = (0..nrows).flat_map(|_| 0..ncols).collect();
        Self { nrows, ncols, indptr, indices }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows, self.ncols)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn row(&self, j: usize) -> &[usize] {
        &self.indices[self.indptr[j]..self.indptr[j + 1]]
    }

    pub fn row_range(&self, j: usize) -> std::ops::Range<usize> {
        self.indptr[j]..self.indptr[j + 1]
    }

    /// Position of (j,k) in the value array.
    pub fn find(&self, j: usize, k: usize) -> Option<usize> {
        let r = self.row_range(j);
        self.indices[r.clone()].binary_search(&k).ok().map(|p| r.start + p)
    }

    pub fn contains(&self, j: usize, k: usize) -> bool {
        self.find(j, k).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.nrows).flat_map(move |j| self.row(j).iter().map(move |&k| (j, k)))
    }

    pub fn is_subset_of(&self, other: &Pattern) -> bool {
        self.shape() == other.shape() && self.iter().all(|(j, k)| other.contains(j, k))
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    pattern: Pattern,
    values: Vec<f64>,
}

impl Csr {
    pub fn new(pattern: Pattern, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::Domain(format!("{} values for {} pattern entries", values.len(), pattern.nnz())));
        }
        Ok(Self { pattern, values })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { pattern: Pattern { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new() }, values: Vec::new() }
    }

    /// Keeps entries of `m` that are nonzero.
    pub fn from_dense(m: &Array2<f64>) -> Self {
        let (nrows, ncols) = m.dim();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for j in 0..nrows {
            for k in 0..ncols {
                let x = m[(j, k)];
                if x != 0.0 {
                    indices.push(k);
                    values.push(x);
                }
            }
            indptr.push(indices.len());
        }
        Self { pattern: Pattern { nrows, ncols, indptr, indices }, values }
    }

    /// Gathers entries of a dense matrix on the given pattern.
    pub fn gather(m: &Array2<f64>, pattern: &Pattern) -> Self {
        let values = pattern.iter().map(|(j, k)| m[(j, k)]).collect();
        Self { pattern: pattern.clone(), values }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.pattern.shape()
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.pattern.row_range(j);
        (&self.pattern.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.pattern.find(j, k).map_or(0.0, |p| self.values[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pattern.iter().zip(self.values.iter()).map(|((j, k), &v)| (j, k, v))
    }

    pub fn matvec(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let (m, _) = self.shape();
        Array1::from_shape_fn(m, |j| {
            let (idx, val) = self.row(j);
            idx.iter().zip(val).map(|(&k, &v)| v * x[k]).sum()
        })
    }

    pub fn tmatvec(&self, y: ArrayView1<f64>) -> Array1<f64> {
        let (m, n) = self.shape();
        let mut out = Array1::zeros(n);
        for j in 0..m {
            let yj = y[j];
            let (idx, val) = self.row(j);
            for (&k, &v) in idx.iter().zip(val) {
                out[k] += v * yj;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Array1<f64> {
        let m = self.shape().0;
        Array1::from_shape_fn(m, |j| self.row(j).1.iter().sum())
    }

    pub fn col_sums(&self) -> Array1<f64> {
        let mut out = Array1::zeros(self.shape().1);
        for (_, k, v) in self.iter() {
            out[k] += v;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros(self.shape());
        for (j, k, v) in self.iter() {
            out[(j, k)] = v;
        }
        out
    }

    pub fn map(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let values = self.iter().map(|(j, k, v)| f(j, k, v)).collect();
        Self { pattern: self.pattern.clone(), values }
    }

    /// Drops explicit zeros.
    pub fn pruned(&self) -> Self {
        let pairs: Vec<(usize, usize, f64)> = self.iter().filter(|t| t.2 != 0.0).collect();
        let (m, n) = self.shape();
        let mut indptr = vec![0; m + 1];
        for &(j, _, _) in &pairs {
            indptr[j + 1] += 1;
        }
        for j in 0..m {
            indptr[j + 1] += indptr[j];
        }
        let indices = pairs.iter().map(|t| t.1).collect();
        let values = pairs.iter().map(|t| t.2).collect();
        Self { pattern: Pattern { nrows: m, ncols: n, indptr, indices }, values }
    }
}
