use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ndarray::Array1;
use otbcd::mmot::{discrete_reference, DiscreteSystem, Oracle1d, PotentialSign};
use otbcd::polytope::fmt_g17;

use crate::settings::KeyValues;
use crate::system::SystemSetup;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "OTBCD_OUT";

/// `--out`, else `out` from the config, else `$OTBCD_OUT/<command>`, else `otbcd-out/<command>`.
pub fn out_dir(flag: Option<&Path>, cfg: &KeyValues, command: &str) -> Result<PathBuf> {
    let dir = match flag {
        Some(p) => p.to_path_buf(),
        None => match cfg.get_str("out") {
            Some(p) => PathBuf::from(p),
            None => PathBuf::from(std::env::var_os(OUT_ENV).unwrap_or_else(|| "otbcd-out".into())).join(command),
        },
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

pub fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

/// `x_1 [x_2 x_3] v` rows, one per atom.
pub fn write_potential(path: &Path, sys: &DiscreteSystem, columns: &[&Array1<f64>]) -> Result<()> {
    write_with(path, |w| {
        for k in 0..sys.len() {
            let mut row: Vec<String> = sys.barycenters.row(k).iter().map(|&x| fmt_g17(x)).collect();
            row.extend(columns.iter().map(|c| fmt_g17(c[k])));
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    })
}

/// Reference objective and potential of a 1-D system.
pub struct Reference {
    pub objective: f64,
    /// `discrete` for the cyclic-shift optimum, `continuous` for the quantile-shift integral.
    pub kind: &'static str,
    pub potential: Array1<f64>,
}

pub fn reference(setup: &SystemSetup, sys: &DiscreteSystem) -> Result<Option<Reference>> {
    let density = setup.density()?;
    if density.dim != 1 {
        return Ok(None);
    }
    let oracle = Oracle1d::new(&density)?;
    let points: Vec<f64> = sys.barycenters.column(0).to_vec();
    let potential = oracle.potential(&points, PotentialSign::Dual, 1e-10);
    Ok(Some(match discrete_reference(sys)? {
        Some(d) => Reference { objective: d.objective, kind: "discrete", potential },
        None => Reference { objective: oracle.obj_star(1e-10), kind: "continuous", potential },
    }))
}
