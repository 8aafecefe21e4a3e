use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use otbcd::methods::{run as run_method, MethodConfig, MethodKind, StopReason};
use otbcd::mmot::{error_metrics, sce_potential, DiscreteSystem, MmotOracle};
use otbcd::polytope::{write_plan, ObjectiveOracle};
use rayon::prelude::*;

use crate::method::{self, MethodArgs};
use crate::output::{out_dir, reference, write_potential, write_with, Reference};
use crate::settings::{KeyValues, MANIFEST_SCHEMA};
use crate::system::{SystemArgs, SystemSetup};

pub const AGGREGATE_SCHEMA: &str = "otbcd-aggregate/1";

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads for trials (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also dump the final plans of every trial.
    #[arg(long = "save-plans")]
    pub save_plans: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub iterations: usize,
    pub stop: StopReason,
    pub objective: f64,
    pub errors: Option<(f64, f64)>,
    pub wall_s: f64,
}

pub fn run(a: &SolveArgs, cfg: &KeyValues) -> Result<()> {
    let setup = SystemSetup::resolve(&a.system, cfg)?;
    let base = a.method.resolve(cfg, MethodKind::SKlalm)?;
    let trials = cfg.pick(a.trials, "trials", 1usize)?;
    if trials == 0 {
        return Err(crate::Usage("--trials must be at least 1".into()).into());
    }
    let save_plans = a.save_plans || cfg.get::<bool>("save_plans")?.unwrap_or(false);
    let threads = cfg.pick_opt(a.threads, "threads")?;
    let sys = setup.build()?;
    let dir = out_dir(a.out.as_deref(), cfg, "solve")?;
    let mut kv = KeyValues::default();
    setup.record(&mut kv);
    method::record(&base, &mut kv, "");
    kv.set("trials", trials);
    kv.set("K_trunc", sys.len());
    kv.set("levels", 1);
    std::fs::write(dir.join("manifest.txt"), kv.render(MANIFEST_SCHEMA))?;
    let reference = reference(&setup, &sys)?;
    let summaries = run_trials(&sys, &base, trials, threads, &dir, save_plans, reference.as_ref())?;
    write_aggregate(&dir, &base, &setup, reference.as_ref(), &summaries)?;
    let n = summaries.len() as f64;
    let mean_obj = summaries.iter().map(|s| s.objective).sum::<f64>() / n;
    let mean_t = summaries.iter().map(|s| s.wall_s).sum::<f64>() / n;
    print!("method = {} trials = {trials} K_trunc = {} mean obj = {mean_obj:.6}", base.kind, sys.len());
    if summaries.iter().all(|s| s.errors.is_some()) {
        let eo = summaries.iter().map(|s| s.errors.unwrap().0).sum::<f64>() / n;
        let es = summaries.iter().map(|s| s.errors.unwrap().1).sum::<f64>() / n;
        print!(" err_obj = {eo:.4} err_sce = {es:.3}");
    }
    println!(" T = {mean_t:.2} s");
    println!("wrote {}", dir.display());
    Ok(())
}

pub fn run_trials(
    sys: &DiscreteSystem,
    base: &MethodConfig,
    trials: usize,
    threads: Option<usize>,
    dir: &Path,
    save_plans: bool,
    reference: Option<&Reference>,
) -> Result<Vec<TrialSummary>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let mut out: Vec<TrialSummary> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let seed = base.seed.wrapping_add(i as u64);
                one_trial(sys, base, i, seed, dir, save_plans, reference).with_context(|| format!("trial {i} (seed {seed})"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    out.sort_by_key(|s| s.trial);
    Ok(out)
}

fn one_trial(
    sys: &DiscreteSystem,
    base: &MethodConfig,
    trial: usize,
    seed: u64,
    dir: &Path,
    save_plans: bool,
    reference: Option<&Reference>,
) -> Result<TrialSummary> {
    let mut cfg = base.clone();
    cfg.seed = seed;
    let oracle = MmotOracle::new(sys);
    let m = sys.marginal();
    let marginals = vec![(m.clone(), m); oracle.block_count()];
    let rec = run_method(&oracle, &marginals, &cfg, None, None)?;
    write_with(&dir.join(format!("trace_t{trial:03}.csv")), |w| Ok(rec.write_csv(w, false)?))?;
    write_with(&dir.join(format!("timing_t{trial:03}.csv")), |w| Ok(rec.write_timing_csv(w)?))?;
    let v = sce_potential(&rec.duals.iter().map(|d| d.1.clone()).collect::<Vec<_>>())?;
    let objective = rec.final_objective();
    let errors = match reference {
        Some(r) => {
            write_potential(&dir.join(format!("potential_t{trial:03}.txt")), sys, &[&v, &r.potential])?;
            Some(error_metrics(objective, r.objective, &v, &r.potential)?)
        }
        None => {
            write_potential(&dir.join(format!("potential_t{trial:03}.txt")), sys, &[&v])?;
            None
        }
    };
    if save_plans {
        for (b, p) in rec.plans.iter().enumerate() {
            write_with(&dir.join(format!("plan_t{trial:03}_b{b}.txt")), |w| Ok(write_plan(p, w)?))?;
        }
    }
    Ok(TrialSummary {
        trial,
        seed,
        iterations: rec.iterations.len(),
        stop: rec.stop,
        objective,
        errors,
        wall_s: rec.wall_ms / 1e3,
    })
}

pub fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Tol => "tol",
        StopReason::TMax => "t_max",
    }
}

/// `aggregate.csv` holds only seed-determined columns; wall times go to `timing.csv`.
fn write_aggregate(dir: &Path, m: &MethodConfig, setup: &SystemSetup, r: Option<&Reference>, s: &[TrialSummary]) -> Result<()> {
    let n = s.len() as f64;
    write_with(&dir.join("aggregate.csv"), |w| {
        writeln!(w, "# {AGGREGATE_SCHEMA} method={} K={} reference={}", m.kind, setup.k, r.map_or("none", |r| r.kind))?;
        writeln!(w, "trial,seed,iterations,stop,objective,err_obj,err_sce")?;
        let fmt_err = |e: Option<(f64, f64)>| e.map_or((String::new(), String::new()), |(a, b)| (format!("{a:.10e}"), format!("{b:.10e}")));
        for t in s {
            let (eo, es) = fmt_err(t.errors);
            writeln!(w, "{},{},{},{},{:.15e},{eo},{es}", t.trial, t.seed, t.iterations, stop_name(t.stop), t.objective)?;
        }
        let mean_err = if s.iter().all(|t| t.errors.is_some()) {
            Some((s.iter().map(|t| t.errors.unwrap().0).sum::<f64>() / n, s.iter().map(|t| t.errors.unwrap().1).sum::<f64>() / n))
        } else {
            None
        };
        let (eo, es) = fmt_err(mean_err);
        let iters = s.iter().map(|t| t.iterations as f64).sum::<f64>() / n;
        writeln!(w, "mean,,{iters:.1},,{:.15e},{eo},{es}", s.iter().map(|t| t.objective).sum::<f64>() / n)?;
        Ok(())
    })?;
    write_with(&dir.join("timing.csv"), |w| {
        writeln!(w, "trial,wall_s")?;
        for t in s {
            writeln!(w, "{},{:.3}", t.trial, t.wall_s)?;
        }
        writeln!(w, "mean,{:.3}", s.iter().map(|t| t.wall_s).sum::<f64>() / n)?;
        Ok(())
    })
}
