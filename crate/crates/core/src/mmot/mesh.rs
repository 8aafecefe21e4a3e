use std::fmt;
use std::str::FromStr;

use super::density::Density;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshStyle {
    /// Equal mass per element (1-D only).
    Equimass,
    /// Uniform grid of congruent boxes.
    Equisize,
}

impl fmt::Display for MeshStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Equimass => "equimass",
            Self::Equisize => "equisize",
        })
    }
}

impl FromStr for MeshStyle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "equimass" => Ok(Self::Equimass),
            "equisize" => Ok(Self::Equisize),
            o => Err(format!("unknown mesh style `{o}` (equimass, equisize)")),
        }
    }
}

/// Axis-aligned box element.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cell {
    pub fn barycenter(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, r: &[f64]) -> bool {
        r.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *x >= *a && *x <= *b)
    }
}

/// Partition of the domain into boxes, with optional links to a coarser mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub style: MeshStyle,
    pub cells: Vec<Cell>,
    /// Grid counts per axis for equisize meshes; cells are ordered with the
    /// last axis fastest.
    pub per_axis: Vec<usize>,
    pub parents: Option<Vec<usize>>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn per_axis_count(k: usize, dim: usize) -> Result<usize> {
    let n = (k as f64).powf(1.0 / dim as f64).round() as usize;
    if n.pow(dim as u32) != k {
        return Err(Error::Domain(format!("K = {k} is not a {dim}-th power")));
    }
    Ok(n)
}

fn grid(density: &Density, per_axis: &[usize]) -> Vec<Cell> {
    let dim = density.dim;
    let total: usize = per_axis.iter().product();
    let mut cells = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for d in 0..dim {
            let (a, b) = density.domain[d];
            let h = (b - a) / per_axis[d] as f64;
            lo[d] = a + h * idx[d] as f64;
            hi[d] = if idx[d] + 1 == per_axis[d] { b } else { a + h * (idx[d] + 1) as f64 };
        }
        cells.push(Cell { lo, hi });
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < per_axis[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    cells
}

pub fn build_mesh(density: &Density, k: usize, style: MeshStyle) -> Result<Mesh> {
    if k < 1 {
        return Err(Error::Domain("K must be positive".into()));
    }
    match style {
        MeshStyle::Equimass => {
            if density.dim != 1 {
                return Err(Error::Unsupported("equimass meshes are one-dimensional only".into()));
            }
            let (lo, hi) = density.domain[0];
            let mut edges: Vec<f64> = (0..=k).map(|i| density.quantile(i as f64 / k as f64)).collect();
            edges[0] = lo;
            edges[k] = hi;
            let cells = edges.windows(2).map(|w| Cell { lo: vec![w[0]], hi: vec![w[1]] }).collect();
            Ok(Mesh { dim: 1, style, cells, per_axis: vec![k], parents: None })
        }
        MeshStyle::Equisize => {
            let n = per_axis_count(k, density.dim)?;
            let per_axis = vec![n; density.dim];
            Ok(Mesh { dim: density.dim, style, cells: grid(density, &per_axis), per_axis, parents: None })
        }
    }
}

/// Splits every element: 1-D equimass cells at their mass median, boxes into
/// 2^d congruent children. Parent links are recorded.
pub fn refine(mesh: &Mesh, density: &Density) -> Result<Mesh> {
    match mesh.style {
        MeshStyle::Equimass => {
            let mut cells = Vec::with_capacity(2 * mesh.len());
            let mut parents = Vec::with_capacity(2 * mesh.len());
            for (p, c) in mesh.cells.iter().enumerate() {
                let (a, b) = (c.lo[0], c.hi[0]);
                let mid = density.quantile(0.5 * (density.cdf(a) + density.cdf(b))).clamp(a, b);
                cells.push(Cell { lo: vec![a], hi: vec![mid] });
                cells.push(Cell { lo: vec![mid], hi: vec![b] });
                parents.extend([p, p]);
            }
            Ok(Mesh { dim: 1, style: mesh.style, per_axis: vec![cells.len()], cells, parents: Some(parents) })
        }
        MeshStyle::Equisize => {
            let per_axis: Vec<usize> = mesh.per_axis.iter().map(|n| 2 * n).collect();
            let cells = grid(density, &per_axis);
            let dim = mesh.dim;
            let mut parents = Vec::with_capacity(cells.len());
            let mut idx = vec![0usize; dim];
            for _ in 0..cells.len() {
                let mut p = 0;
                for d in 0..dim {
                    p = p * mesh.per_axis[d] + idx[d] / 2;
                }
                parents.push(p);
                for d in (0..dim).rev() {
                    idx[d] += 1;
                    if idx[d] < per_axis[d] {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            Ok(Mesh { dim, style: mesh.style, cells, per_axis, parents: Some(parents) })
        }
    }
}
