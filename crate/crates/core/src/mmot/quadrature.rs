//! Adaptive Gauss-Legendre quadrature.

use std::sync::OnceLock;

/// Nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rules() -> &'static ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) {
    static R: OnceLock<((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>))> = OnceLock::new();
    R.get_or_init(|| (gauss_legendre(10), gauss_legendre(21)))
}

fn apply(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// ∫_a^b f with absolute tolerance `tol`, bisecting where the 10- and 21-point
/// rules disagree.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi) = rules();
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol, 0u32)];
    while let Some((x0, x1, eps, depth)) = stack.pop() {
        let coarse = apply(&mut f, x0, x1, lo);
        let fine = apply(&mut f, x0, x1, hi);
        if (fine - coarse).abs() <= eps || depth >= 48 {
            total += fine;
        } else {
            let mid = 0.5 * (x0 + x1);
            stack.push((x0, mid, 0.5 * eps, depth + 1));
            stack.push((mid, x1, 0.5 * eps, depth + 1));
        }
    }
    total
}

/// ∫ over consecutive breakpoints.
pub fn integrate_pieces(mut f: impl FnMut(f64) -> f64, points: &[f64], tol: f64) -> f64 {
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    points.windows(2).map(|w| integrate(&mut f, w[0], w[1], tol / pieces)).sum()
}
