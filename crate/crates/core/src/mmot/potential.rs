use ndarray::Array1;

use super::system::DiscreteSystem;
use crate::error::{Error, Result};
use crate::polytope::Plan;

/// Averages the per-block column duals and shifts the result to minimum zero.
pub fn sce_potential(duals: &[Array1<f64>]) -> Result<Array1<f64>> {
    let first = duals.first().ok_or_else(|| Error::Domain("no dual vectors".into()))?;
    let k = first.len();
    let mut v = Array1::zeros(k);
    for d in duals {
        if d.len() != k {
            return Err(Error::Shape { expected: (k, 1), got: (d.len(), 1) });
        }
        v += d;
    }
    v /= duals.len() as f64;
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(v.mapv(|x| x - min))
}

/// Source atom and its barycentric image under one coupling block.
#[derive(Clone, Debug, PartialEq)]
pub struct MapPoint {
    pub index: usize,
    pub source: Vec<f64>,
    pub image: Vec<f64>,
}

/// 𝒯(d_j) = Σ_k y_jk d_k / ϱ_j for every atom with positive mass.
pub fn ot_map(y: &Plan, sys: &DiscreteSystem) -> Result<Vec<MapPoint>> {
    let k = sys.len();
    if y.shape() != (k, k) {
        return Err(Error::Shape { expected: (k, k), got: y.shape() });
    }
    let d = sys.dim;
    let mut images = vec![vec![0.0; d]; k];
    for (j, l, v) in y.entries() {
        for (acc, x) in images[j].iter_mut().zip(sys.barycenters.row(l)) {
            *acc += v * x;
        }
    }
    Ok(images
        .into_iter()
        .enumerate()
        .filter(|&(j, _)| sys.masses[j] > 0.0)
        .map(|(j, img)| MapPoint {
            index: j,
            source: sys.barycenters.row(j).to_vec(),
            image: img.into_iter().map(|x| x / sys.masses[j]).collect(),
        })
        .collect())
}

/// Points restricted to sources inside the box [lo, hi].
pub fn restrict_map(points: &[MapPoint], lo: &[f64], hi: &[f64]) -> Vec<MapPoint> {
    points
        .iter()
        .filter(|p| p.source.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| x >= a && x <= b))
        .cloned()
        .collect()
}

/// (err_obj, err_sce) = (|obj − obj*| / |obj*|, ‖v − v*‖_∞ / ‖v*‖_∞).
pub fn error_metrics(obj: f64, obj_star: f64, v: &Array1<f64>, v_star: &Array1<f64>) -> Result<(f64, f64)> {
    if obj_star == 0.0 {
        return Err(Error::Domain("reference objective is zero".into()));
    }
    if v.len() != v_star.len() {
        return Err(Error::Shape { expected: (v_star.len(), 1), got: (v.len(), 1) });
    }
    let norm = v_star.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 {
        return Err(Error::Domain("reference potential is zero".into()));
    }
    let diff = v.iter().zip(v_star).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(((obj - obj_star).abs() / obj_star.abs(), diff / norm))
}
