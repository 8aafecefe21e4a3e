use crate::error::{Error, Result};

/// Least-squares fit of log y = e · log x + log c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLaw> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("need at least two (x, y) pairs of equal count".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("x values are all equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let e = sxy / sxx;
    let b = my - e * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(a, c)| (c - (e * a + b)).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|c| (c - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PowerLaw { exponent: e, prefactor: b.exp(), r2 })
}
