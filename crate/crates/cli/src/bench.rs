use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use otbcd::methods::{fit_power_law, run as run_method, MethodKind};
use otbcd::mmot::MmotOracle;
use otbcd::polytope::ObjectiveOracle;

use crate::method::MethodArgs;
use crate::output::{out_dir, write_with};
use crate::settings::KeyValues;
use crate::system::{SystemArgs, SystemSetup};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// --K is ignored; sizes come from --ks.
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<MethodKind>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &BenchArgs, cfg: &KeyValues) -> Result<()> {
    let ks = match a.ks.clone() {
        Some(v) => v,
        None => match cfg.get_str("ks") {
            Some(s) => s.split(',').map(|x| x.trim().parse::<usize>()).collect::<Result<_, _>>().context("key `ks`")?,
            None => vec![90, 180, 360],
        },
    };
    let methods = match a.methods.clone() {
        Some(v) => v,
        None => match cfg.get_str("methods") {
            Some(s) => s.split(',').map(|x| x.trim().parse::<MethodKind>().map_err(anyhow::Error::msg)).collect::<Result<_>>()?,
            None => vec![MethodKind::Klalm, MethodKind::SKlalm],
        },
    };
    if ks.len() < 2 {
        return Err(crate::Usage("--ks needs at least two sizes".into()).into());
    }
    let trials = cfg.pick(a.trials, "trials", 1usize)?.max(1);
    let dir = out_dir(a.out.as_deref(), cfg, "bench")?;
    let mut rows = Vec::new();
    for &kind in &methods {
        let mut means = Vec::with_capacity(ks.len());
        for &k in &ks {
            let mut sa = a.system.clone();
            sa.k = Some(k);
            if sa.system.is_none() && sa.density.is_none() && cfg.get_str("system").is_none() && cfg.get_str("density").is_none() {
                sa.system = Some(1);
            }
            let setup = SystemSetup::resolve(&sa, cfg)?;
            let sys = setup.build()?;
            let oracle = MmotOracle::new(&sys);
            let m = sys.marginal();
            let marginals = vec![(m.clone(), m); oracle.block_count()];
            let mut total = 0.0;
            for t in 0..trials {
                let mut mc = a.method.resolve(cfg, kind)?;
                mc.kind = kind;
                mc.seed = mc.seed.wrapping_add(t as u64);
                let rec = run_method(&oracle, &marginals, &mc, None, None).with_context(|| format!("{kind} K={k} trial {t}"))?;
                let secs = rec.wall_ms / 1e3;
                total += secs;
                rows.push(format!("{kind},{k},{},{t},{},{:.10e},{secs:.4}", sys.len(), rec.iterations.len(), rec.final_objective()));
            }
            means.push(total / trials as f64);
        }
        let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
        let fit = fit_power_law(&x, &means)?;
        println!("{kind}: T ~ K^{:.3} (r2 = {:.3})", fit.exponent, fit.r2);
        rows.push(format!("# fit {kind} exponent={:.6} prefactor={:.6e} r2={:.6}", fit.exponent, fit.prefactor, fit.r2));
    }
    write_with(&dir.join("bench.csv"), |w| {
        writeln!(w, "method,K,K_trunc,trial,iterations,objective,wall_s")?;
        for r in rows.iter().filter(|r| !r.starts_with('#')) {
            writeln!(w, "{r}")?;
        }
        Ok(())
    })?;
    write_with(&dir.join("exponents.txt"), |w| {
        for r in rows.iter().filter(|r| r.starts_with('#')) {
            writeln!(w, "{}", &r[2..])?;
        }
        Ok(())
    })?;
    println!("wrote {}", dir.display());
    Ok(())
}
