use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otbcd::polytope::{fmt_g17, write_marginal};

use crate::output::{out_dir, write_with};
use crate::settings::{KeyValues, MANIFEST_SCHEMA};
use crate::system::{render_density, SystemArgs, SystemSetup};

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &GenArgs, cfg: &KeyValues) -> Result<()> {
    let setup = SystemSetup::resolve(&a.system, cfg)?;
    let density = setup.density()?;
    let sys = setup.build()?;
    let dir = out_dir(a.out.as_deref(), cfg, "gen")?;
    let mut kv = KeyValues::default();
    setup.record(&mut kv);
    kv.set("dim", sys.dim);
    kv.set("n_electrons", sys.n_electrons);
    kv.set("K_trunc", sys.len());
    kv.set("cost_checksum", format!("{:016x}", sys.cost_checksum()));
    std::fs::write(dir.join("manifest.txt"), kv.render(MANIFEST_SCHEMA))?;
    std::fs::write(dir.join("density.txt"), render_density(&density))?;
    write_with(&dir.join("masses.txt"), |w| Ok(write_marginal(&sys.marginal(), w)?))?;
    write_with(&dir.join("barycenters.txt"), |w| {
        for row in sys.barycenters.rows() {
            writeln!(w, "{}", row.iter().map(|&x| fmt_g17(x)).collect::<Vec<_>>().join(" "))?;
        }
        Ok(())
    })?;
    println!("K = {} K_trunc = {} dim = {} N_e = {}", setup.k, sys.len(), sys.dim, sys.n_electrons);
    println!("wrote {}", dir.display());
    Ok(())
}
