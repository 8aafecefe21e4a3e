use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use otbcd::methods::{MethodConfig, MethodKind};
use otbcd::mmot::{error_metrics, sce_potential};
use otbcd::multigrid::{run_cmg_guarded, CmgRun, LevelConfig, TolSchedule};
use otbcd::polytope::write_plan;
use rayon::prelude::*;

use crate::method::{self, MethodArgs};
use crate::output::{out_dir, reference, write_potential, write_with};
use crate::settings::{KeyValues, MANIFEST_SCHEMA};
use crate::solve::{stop_name, AGGREGATE_SCHEMA};
use crate::system::{SystemArgs, SystemSetup};

#[derive(Args, Debug)]
pub struct CmgArgs {
    /// --K is the level-0 mesh size.
    #[command(flatten)]
    pub system: SystemArgs,
    /// Settings of the solver on levels ≥ 1 (default s-klalm); --tol is the level-0 tolerance.
    #[command(flatten)]
    pub method: MethodArgs,
    /// Solver on level 0.
    #[arg(long)]
    pub accurate: Option<MethodKind>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Explicit comma-separated per-level tolerances instead of the growth rule.
    #[arg(long, value_delimiter = ',')]
    pub tols: Option<Vec<f64>>,
    /// Abort before solving a level whose K_trunc exceeds this.
    #[arg(long = "max-atoms")]
    pub max_atoms: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long = "save-plans")]
    pub save_plans: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &CmgArgs, cfg: &KeyValues) -> Result<()> {
    let setup = SystemSetup::resolve(&a.system, cfg)?;
    let cheap = a.method.resolve(cfg, MethodKind::SKlalm)?;
    let mut accurate = cheap.clone();
    accurate.kind = cfg.pick(a.accurate, "accurate", MethodKind::Klalm)?;
    let n_levels = cfg.pick(a.levels, "levels", 1usize)?;
    if n_levels == 0 {
        return Err(crate::Usage("--levels must be at least 1".into()).into());
    }
    let tol = match a.tols.clone() {
        Some(v) => TolSchedule::Explicit(v),
        None => match cfg.get_str("tols") {
            Some(s) => TolSchedule::Explicit(s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().context("key `tols`")?),
            None => TolSchedule::Growth { tol0: cheap.tol },
        },
    };
    let levels = LevelConfig { levels: n_levels, tol };
    let max_atoms = cfg.pick_opt(a.max_atoms, "max_atoms")?;
    let trials = cfg.pick(a.trials, "trials", 1usize)?;
    if trials == 0 {
        return Err(crate::Usage("--trials must be at least 1".into()).into());
    }
    let threads = cfg.pick_opt(a.threads, "threads")?;
    let save_plans = a.save_plans || cfg.get::<bool>("save_plans")?.unwrap_or(false);
    let dir = out_dir(a.out.as_deref(), cfg, "cmg")?;
    let mut kv = KeyValues::default();
    setup.record(&mut kv);
    method::record(&cheap, &mut kv, "");
    kv.set("accurate", accurate.kind);
    kv.set("levels", n_levels);
    kv.set("trials", trials);
    std::fs::write(dir.join("manifest.txt"), kv.render(MANIFEST_SCHEMA))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let runs: Vec<CmgRun> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let seed = cheap.seed.wrapping_add(1000 * i as u64);
                one_trial(&setup, &levels, &accurate, &cheap, seed, max_atoms, i, &dir, save_plans)
                    .with_context(|| format!("trial {i} (seed {seed})"))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let finest = &runs[0].last().record;
    let sys = &runs[0].hierarchy.level(n_levels - 1).system;
    let reference = reference(&setup, sys)?;
    let n = trials as f64;
    write_with(&dir.join("aggregate.csv"), |w| {
        writeln!(w, "# {AGGREGATE_SCHEMA} method={}-cmg K={} reference={}", cheap.kind, setup.k, reference.as_ref().map_or("none", |r| r.kind))?;
        writeln!(w, "trial,seed,iterations,stop,objective,err_obj,err_sce")?;
        let (mut so, mut se, mut sobj) = (0.0, 0.0, 0.0);
        for (i, r) in runs.iter().enumerate() {
            let rec = &r.last().record;
            let obj = rec.final_objective();
            sobj += obj;
            let (eo, es) = match &reference {
                Some(rf) => {
                    let v = sce_potential(&rec.duals.iter().map(|d| d.1.clone()).collect::<Vec<_>>())?;
                    let (eo, es) = error_metrics(obj, rf.objective, &v, &rf.potential)?;
                    so += eo;
                    se += es;
                    (format!("{eo:.10e}"), format!("{es:.10e}"))
                }
                None => (String::new(), String::new()),
            };
            let iters: usize = r.levels.iter().map(|l| l.record.iterations.len()).sum();
            writeln!(w, "{i},{},{iters},{},{obj:.15e},{eo},{es}", rec.seed, stop_name(rec.stop))?;
        }
        if reference.is_some() {
            writeln!(w, "mean,,,,{:.15e},{:.10e},{:.10e}", sobj / n, so / n, se / n)?;
        } else {
            writeln!(w, "mean,,,,{:.15e},,", sobj / n)?;
        }
        Ok(())
    })?;
    write_with(&dir.join("timing.csv"), |w| {
        writeln!(w, "trial,wall_s")?;
        for (i, r) in runs.iter().enumerate() {
            writeln!(w, "{i},{:.3}", r.wall_ms / 1e3)?;
        }
        writeln!(w, "mean,{:.3}", runs.iter().map(|r| r.wall_ms).sum::<f64>() / 1e3 / n)?;
        Ok(())
    })?;
    runs[0].write_summary(std::io::stdout(), true)?;
    if let Some(rf) = &reference {
        let obj = finest.final_objective();
        println!("reference ({}) obj* = {:.6} err_obj(trial 0) = {:.4}", rf.kind, rf.objective, (obj - rf.objective).abs() / rf.objective);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn one_trial(
    setup: &SystemSetup,
    levels: &LevelConfig,
    accurate: &MethodConfig,
    cheap: &MethodConfig,
    seed: u64,
    max_atoms: Option<usize>,
    trial: usize,
    dir: &Path,
    save_plans: bool,
) -> Result<CmgRun> {
    let (mut a, mut c) = (accurate.clone(), cheap.clone());
    a.seed = seed;
    c.seed = seed;
    let mut guard = |l: usize, sys: &otbcd::mmot::DiscreteSystem| -> otbcd::Result<()> {
        match max_atoms {
            Some(m) if sys.len() > m => Err(otbcd::Error::Domain(format!(
                "level {l} has K_trunc = {} atoms, above the --max-atoms limit of {m}; \
                 a dense block of this size needs about {:.1} GiB",
                sys.len(),
                (sys.len() * sys.len() * 8) as f64 / (1u64 << 30) as f64
            ))),
            _ => Ok(()),
        }
    };
    let run = run_cmg_guarded(setup.density()?, setup.k, setup.style, setup.opts, levels, &a, &c, &mut guard)?;
    for l in &run.levels {
        write_with(&dir.join(format!("trace_t{trial:03}_l{}.csv", l.level)), |w| Ok(l.record.write_csv(w, false)?))?;
    }
    write_with(&dir.join(format!("summary_t{trial:03}.csv")), |w| Ok(run.write_summary(w, false)?))?;
    let last = run.last();
    let sys = &run.hierarchy.level(last.level).system;
    let v = sce_potential(&last.record.duals.iter().map(|d| d.1.clone()).collect::<Vec<_>>())?;
    write_potential(&dir.join(format!("potential_t{trial:03}.txt")), sys, &[&v])?;
    if save_plans {
        for (b, p) in last.record.plans.iter().enumerate() {
            write_with(&dir.join(format!("plan_t{trial:03}_b{b}.txt")), |w| Ok(write_plan(p, w)?))?;
        }
    }
    Ok(run)
}
