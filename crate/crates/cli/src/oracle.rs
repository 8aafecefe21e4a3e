use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use otbcd::mmot::{discrete_reference, Oracle1d, PotentialSign};
use otbcd::polytope::fmt_g17;

use crate::output::{out_dir, write_potential, write_with};
use crate::settings::KeyValues;
use crate::system::{SystemArgs, SystemSetup};

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// --K sets the grid on which maps and the potential are tabulated.
    #[command(flatten)]
    pub system: SystemArgs,
    /// dual or reversed orientation of the potential.
    #[arg(long)]
    pub sign: Option<PotentialSign>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &OracleArgs, cfg: &KeyValues) -> Result<()> {
    let setup = SystemSetup::resolve(&a.system, cfg)?;
    let density = setup.density()?;
    let oracle = Oracle1d::new(&density)?;
    let sign = cfg.pick(a.sign, "sign", PotentialSign::Dual)?;
    let tol = cfg.pick(a.quad_tol, "quad_tol", 1e-10)?;
    let sys = setup.build()?;
    let dir = out_dir(a.out.as_deref(), cfg, "oracle")?;
    let points: Vec<f64> = sys.barycenters.column(0).to_vec();
    write_with(&dir.join("comotion.txt"), |w| {
        for &x in &points {
            let row: Vec<String> = (0..oracle.n_electrons()).map(|i| fmt_g17(oracle.comotion(i, x))).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    })?;
    let v = oracle.potential(&points, sign, tol);
    write_potential(&dir.join("potential.txt"), &sys, &[&v])?;
    let continuous = oracle.obj_star(tol);
    print!("obj* continuous = {continuous:.10}");
    if let Some(d) = discrete_reference(&sys)? {
        print!(" discrete(K_trunc = {}) = {:.10}", sys.len(), d.objective);
    }
    println!();
    println!("wrote {}", dir.display());
    Ok(())
}
