use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use otbcd::mmot::{ot_map, restrict_map};
use otbcd::polytope::{fmt_g17, read_plan};

use crate::output::write_with;
use crate::settings::{KeyValues, MANIFEST_SCHEMA};
use crate::system::SystemSetup;

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Directory written by `solve` or `cmg` with --save-plans.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    /// Lower corner of the source box ω, comma separated (default: whole domain).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lo: Option<Vec<f64>>,
    /// Upper corner of ω.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub hi: Option<Vec<f64>>,
    /// Output directory (default: the run directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &PlotArgs) -> Result<()> {
    let manifest = KeyValues::read(&a.run.join("manifest.txt"), MANIFEST_SCHEMA)?;
    let setup = SystemSetup::from_manifest(&manifest)?;
    let levels = manifest.get::<usize>("levels")?.unwrap_or(1);
    let sys = setup.build_levels(levels)?;
    let d = sys.dim;
    let domain = setup.density()?.domain;
    let lo = a.lo.clone().unwrap_or_else(|| domain.iter().map(|x| x.0).collect());
    let hi = a.hi.clone().unwrap_or_else(|| domain.iter().map(|x| x.1).collect());
    if lo.len() != d || hi.len() != d {
        return Err(crate::Usage(format!("--lo and --hi need {d} coordinates")).into());
    }
    let out = a.out.clone().unwrap_or_else(|| a.run.clone());
    std::fs::create_dir_all(&out)?;
    let m = sys.marginal();
    let t = a.trial;
    for b in 0..sys.n_electrons - 1 {
        let path = a.run.join(format!("plan_t{t:03}_b{b}.txt"));
        if !path.exists() {
            bail!("{} not found; rerun with --save-plans", path.display());
        }
        let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
        let plan = read_plan(BufReader::new(file), m.clone(), m.clone()).with_context(|| format!("reading {}", path.display()))?;
        let points = restrict_map(&ot_map(&plan, &sys)?, &lo, &hi);
        if points.is_empty() {
            eprintln!("warning: no atom of block {b} lies in the requested box");
        }
        write_with(&out.join(format!("map_t{t:03}_b{b}.txt")), |w| {
            for p in &points {
                let mut row = vec![p.index.to_string()];
                row.extend(p.source.iter().chain(&p.image).map(|&x| fmt_g17(x)));
                writeln!(w, "{}", row.join(" "))?;
            }
            Ok(())
        })?;
    }
    let potential = a.run.join(format!("potential_t{t:03}.txt"));
    if potential.exists() && out != a.run {
        std::fs::copy(&potential, out.join(format!("potential_t{t:03}.txt")))?;
    }
    println!("wrote {} map files to {}", sys.n_electrons - 1, out.display());
    Ok(())
}
