//! The eight benchmark systems: 1-D systems 1 to 4, 2-D systems 5 and 6, 3-D systems 7 and 8.

use super::density::{Density, Term};
use crate::error::{Error, Result};

fn gauss(weight: f64, alpha: f64, center: &[f64]) -> Term {
    Term::Gaussian { weight, alpha, center: center.to_vec() }
}

pub const SYSTEM_COUNT: usize = 8;

pub fn system(id: usize) -> Result<Density> {
    let (terms, domain, n) = match id {
        1 => (vec![Term::CosineBump { weight: 1.0 }], vec![(-1.0, 1.0)], 3),
        2 => (vec![gauss(2.0, 6.0, &[-0.5]), gauss(1.5, 4.0, &[0.5])], vec![(-1.5, 1.5)], 3),
        3 => (vec![gauss(1.0, 1.0 / std::f64::consts::PI.sqrt(), &[0.0])], vec![(-2.0, 2.0)], 7),
        4 => (
            [-2.0, -1.5, -1.0, -0.5, 2.0 / 3.0, 4.0 / 3.0, 2.0].iter().map(|&c| gauss(1.0, 4.0, &[c])).collect(),
            vec![(-3.0, 3.0)],
            7,
        ),
        5 => (
            vec![gauss(1.0, 3.0, &[0.0, 0.96]), gauss(1.0, 3.0, &[1.032, -0.84]), gauss(1.0, 3.0, &[-1.032, -0.84])],
            vec![(-3.0, 3.0); 2],
            3,
        ),
        6 => (
            vec![gauss(2.0, 3.0, &[0.0, 1.2]), gauss(1.0, 3.0, &[1.29, -1.05]), gauss(1.0, 3.0, &[-1.29, -1.05])],
            vec![(-3.0, 3.0); 2],
            4,
        ),
        7 => (
            vec![
                gauss(1.0, 3.0, &[-1.0, -1.0, -1.0]),
                gauss(1.0, 3.0, &[1.0, 1.0, -1.0]),
                gauss(1.0, 3.0, &[-1.0, 1.0, 1.0]),
            ],
            vec![(-2.0, 2.0); 3],
            3,
        ),
        8 => (
            vec![gauss(3.0, 4.0, &[-1.0, 0.0, 0.0]), gauss(1.0, 4.0, &[1.0, 0.0, 0.0])],
            vec![(-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)],
            4,
        ),
        _ => return Err(Error::Domain(format!("unknown system {id} (1 to {SYSTEM_COUNT})"))),
    };
    Density::new(terms, domain, n)
}
