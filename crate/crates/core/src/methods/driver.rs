use std::time::Instant;

use ndarray::{Array1, Array2};

use super::config::{MethodConfig, MethodKind, RegRule, StepRule};
use super::plans::{convex_update, densified, initial_plans, weighted_diff_sq};
use super::record::{IterRecord, Phases, RunRecord, StopReason};
use super::schedule::{adaptive_parameter, power_decay, theoretical_step};
use crate::error::{Error, Result};
use crate::polytope::{Marginal, ObjectiveOracle, Plan, TheoryBound};
use crate::sinkhorn::{recover_plan, sinkhorn_solve, GibbsKernel, ScalingState, SinkhornStatus};
use crate::sparsify::{effective_cost, mixture_probabilities, poisson_sample_with, SampleKey, SampledSupport};

/// Called with (t, iterate) for t = 0 and after every outer iteration.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &[Plan]) -> Result<()>;

pub fn run_eralm(oracle: &dyn ObjectiveOracle, marginals: &[(Marginal, Marginal)], cfg: &MethodConfig) -> Result<RunRecord> {
    run_kind(MethodKind::Eralm, oracle, marginals, cfg)
}

pub fn run_s_eralm(oracle: &dyn ObjectiveOracle, marginals: &[(Marginal, Marginal)], cfg: &MethodConfig) -> Result<RunRecord> {
    run_kind(MethodKind::SEralm, oracle, marginals, cfg)
}

pub fn run_klalm(oracle: &dyn ObjectiveOracle, marginals: &[(Marginal, Marginal)], cfg: &MethodConfig) -> Result<RunRecord> {
    run_kind(MethodKind::Klalm, oracle, marginals, cfg)
}

pub fn run_s_klalm(oracle: &dyn ObjectiveOracle, marginals: &[(Marginal, Marginal)], cfg: &MethodConfig) -> Result<RunRecord> {
    run_kind(MethodKind::SKlalm, oracle, marginals, cfg)
}

fn run_kind(kind: MethodKind, oracle: &dyn ObjectiveOracle, marginals: &[(Marginal, Marginal)], cfg: &MethodConfig) -> Result<RunRecord> {
    let cfg = MethodConfig { kind, ..cfg.clone() };
    run(oracle, marginals, &cfg, None, None)
}

struct BlockState {
    duals: Option<(Array1<f64>, Array1<f64>)>,
    frozen: Option<SampledSupport>,
}

/// Outer loop shared by all four methods. `init` defaults to seeded random
/// feasible plans.
pub fn run(
    oracle: &dyn ObjectiveOracle,
    marginals: &[(Marginal, Marginal)],
    cfg: &MethodConfig,
    init: Option<Vec<Plan>>,
    mut observer: Option<Observer<'_>>,
) -> Result<RunRecord> {
    let start = Instant::now();
    let nb = oracle.block_count();
    if marginals.len() != nb {
        return Err(Error::Domain(format!("{} marginal pairs for {nb} blocks", marginals.len())));
    }
    for (i, (a, b)) in marginals.iter().enumerate() {
        let expected = oracle.block_shape(i);
        if (a.len(), b.len()) != expected {
            return Err(Error::Shape { expected, got: (a.len(), b.len()) });
        }
    }
    if !(0.0..=1.0).contains(&cfg.gamma) {
        return Err(Error::Domain(format!("γ = {} outside [0,1]", cfg.gamma)));
    }
    if cfg.t_max == 0 && !(cfg.tol > 0.0) {
        return Err(Error::Domain("need tol > 0 or a finite t_max".into()));
    }
    let mut x = match init {
        Some(p) => p,
        None => initial_plans(marginals, cfg.seed)?,
    };
    if x.len() != nb {
        return Err(Error::Domain("initial plan count differs from block count".into()));
    }
    if !cfg.kind.is_sampled() {
        x = x.iter().map(densified).collect::<Result<_>>()?;
    }
    if let Some(obs) = observer.as_mut() {
        obs(0, &x)?;
    }
    let f0 = oracle.objective(&x);
    let fixed_alpha = match cfg.step {
        StepRule::Theoretical { lipschitz, f_lower } => {
            let lambda = match cfg.reg {
                RegRule::Fixed(l) => l,
                RegRule::Adaptive { .. } => 0.0,
            };
            let tb = TheoryBound::new(marginals, lipschitz, f_lower, lambda, cfg.t_max)?;
            Some(theoretical_step(&tb, f0 - f_lower)?)
        }
        StepRule::Constant(a) if a > 0.0 && a <= 1.0 => Some(a),
        StepRule::Constant(a) => return Err(Error::Domain(format!("step {a} outside (0,1]"))),
        StepRule::PowerDecay(_) => None,
    };
    let mut blocks: Vec<BlockState> = (0..nb).map(|_| BlockState { duals: None, frozen: None }).collect();
    let mut iterations = Vec::new();
    let mut resamples_total = 0;
    let mut floor_hits = 0;
    let mut stop = StopReason::TMax;
    let mut t = 0usize;
    while t < cfg.t_max || cfg.t_max == 0 {
        let it_start = Instant::now();
        let alpha = match (fixed_alpha, cfg.step) {
            (Some(a), _) => a,
            (None, StepRule::PowerDecay(p)) => power_decay(t, p),
            _ => unreachable!(),
        };
        let mut rec = IterRecord {
            t: t + 1,
            delta: 0.0,
            objective: 0.0,
            alpha,
            reg: Vec::with_capacity(nb),
            support: Vec::with_capacity(nb),
            sweeps: Vec::with_capacity(nb),
            resamples: 0,
            wall_ms: 0.0,
            phases: Phases::default(),
        };
        let mut delta = 0.0;
        for i in 0..nb {
            let (a, b) = &marginals[i];
            let step = block_step(oracle, &x, i, a, b, t, alpha, cfg, &mut blocks[i], &mut rec, &mut floor_hits)?;
            delta += weighted_diff_sq(&x[i], &step, a.masses()).sqrt();
            x[i] = step;
        }
        rec.delta = delta / nb as f64;
        rec.objective = oracle.objective(&x);
        rec.wall_ms = it_start.elapsed().as_secs_f64() * 1e3;
        resamples_total += rec.resamples;
        let converged = rec.delta <= cfg.tol;
        iterations.push(rec);
        t += 1;
        if let Some(obs) = observer.as_mut() {
            obs(t, &x)?;
        }
        if converged {
            stop = StopReason::Tol;
            break;
        }
    }
    let duals = blocks
        .into_iter()
        .zip(marginals)
        .map(|(s, (a, b))| s.duals.unwrap_or_else(|| (Array1::zeros(a.len()), Array1::zeros(b.len()))))
        .collect();
    Ok(RunRecord {
        kind: cfg.kind,
        seed: cfg.seed,
        iterations,
        initial_objective: f0,
        plans: x,
        duals,
        stop,
        resamples: resamples_total,
        parameter_floor_hits: floor_hits,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn grid_size(cfg: &MethodConfig, a: &Marginal, b: &Marginal) -> usize {
    cfg.grid_size.unwrap_or(a.len().max(b.len())).max(2)
}

/// λ or μ for one block.
fn parameter(cfg: &MethodConfig, state: &BlockState, grid: usize, bootstrap: impl FnOnce() -> f64, floor_hits: &mut usize) -> Result<f64> {
    match cfg.reg {
        RegRule::Fixed(l) => Ok(l),
        RegRule::Adaptive { sigma } => {
            let v = match &state.duals {
                Some((_, v)) => {
                    let vmin = v.iter().cloned().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
                    v.mapv(|x| x - vmin)
                }
                None => Array1::from_elem(1, bootstrap()),
            };
            let (p, floored) = adaptive_parameter(&v, grid, sigma)?;
            if floored {
                *floor_hits += 1;
            }
            Ok(p)
        }
    }
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { m })
}

#[allow(clippy::too_many_arguments)]
fn block_step(
    oracle: &dyn ObjectiveOracle,
    x: &[Plan],
    i: usize,
    a: &Marginal,
    b: &Marginal,
    t: usize,
    alpha: f64,
    cfg: &MethodConfig,
    state: &mut BlockState,
    rec: &mut IterRecord,
    floor_hits: &mut usize,
) -> Result<Plan> {
    let grid = grid_size(cfg, a, b);
    let sampled_now = match cfg.kind {
        MethodKind::SEralm => true,
        MethodKind::SKlalm => t >= cfg.t_hat,
        _ => false,
    };
    if !sampled_now {
        let clock = Instant::now();
        let g = oracle.block_gradient(i, x);
        rec.phases.gradient_ms += ms(clock);
        let lambda = parameter(cfg, state, grid, || max_abs(g.iter().cloned()), floor_hits)?;
        let clock = Instant::now();
        let cost = if cfg.kind.is_kl() { kl_cost(&g, &x[i], lambda) } else { g };
        let gk = GibbsKernel::dense(&cost, lambda)?;
        rec.phases.kernel_ms += ms(clock);
        let clock = Instant::now();
        let (plan, status) = solve(&gk, a, b, cfg, state)?;
        rec.phases.sinkhorn_ms += ms(clock);
        record(rec, lambda, gk.kernel.nnz(), status);
        return if cfg.kind.is_kl() { Ok(plan) } else { convex_update(&x[i], &plan, alpha) };
    }

    // Sampled paths.
    let n_s = cfg.sample_size(a.len(), b.len());
    let clock = Instant::now();
    let mut support = match (&state.frozen, cfg.kind) {
        (Some(s), MethodKind::SKlalm) => s.clone(),
        _ => {
            let p = mixture_probabilities(&x[i], a, b, cfg.gamma)?;
            poisson_sample_with(&p, n_s, SampleKey::new(cfg.seed, t, i), cfg.sampler)?
        }
    };
    rec.phases.sampling_ms += ms(clock);
    let mut attempt = 0;
    loop {
        let clock = Instant::now();
        let g = oracle.block_gradient_entries(i, x, &support.pattern);
        rec.phases.gradient_ms += ms(clock);
        let lambda = parameter(cfg, state, grid, || max_abs(g.values().iter().cloned()), floor_hits)?;
        let clock = Instant::now();
        let gvals = g.values();
        let mut pos = 0;
        let cost = effective_cost(
            |j, k| {
                let c = gvals[pos];
                pos += 1;
                if cfg.kind.is_kl() {
                    let xv = x[i].get(j, k);
                    if xv > 0.0 {
                        c - lambda * xv.ln()
                    } else {
                        f64::INFINITY
                    }
                } else {
                    c
                }
            },
            lambda,
            &support,
        )?;
        let result = GibbsKernel::sparse(&cost, lambda).and_then(|gk| {
            rec.phases.kernel_ms += ms(clock);
            let clock = Instant::now();
            let r = solve(&gk, a, b, cfg, state).map(|(p, s)| (p, s, gk.kernel.nnz()));
            rec.phases.sinkhorn_ms += ms(clock);
            r
        });
        match result {
            Ok((plan, status, nnz)) => {
                record(rec, lambda, nnz, status);
                if cfg.kind == MethodKind::SKlalm {
                    if state.frozen.is_none() {
                        state.frozen = Some(support);
                    }
                    return Ok(plan);
                }
                return convex_update(&x[i], &plan, alpha);
            }
            Err(e) if (e.is_infeasible() || matches!(e, Error::KernelUnderflow)) && attempt == 0 && state.frozen.is_none() => {
                attempt += 1;
                rec.resamples += 1;
                let clock = Instant::now();
                let p = mixture_probabilities(&x[i], a, b, cfg.gamma)?;
                support = poisson_sample_with(&p, n_s, support.key.retry(), cfg.sampler)?;
                rec.phases.sampling_ms += ms(clock);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Effective cost G − μ log X of the KL-proximal subproblem; +∞ off supp(X).
fn kl_cost(g: &Array2<f64>, x: &Plan, mu: f64) -> Array2<f64> {
    let mut c = g.clone();
    for ((j, k), v) in c.indexed_iter_mut() {
        let xv = x.get(j, k);
        *v = if xv > 0.0 { *v - mu * xv.ln() } else { f64::INFINITY };
    }
    c
}

fn solve(gk: &GibbsKernel, a: &Marginal, b: &Marginal, cfg: &MethodConfig, state: &mut BlockState) -> Result<(Plan, SinkhornStatus)> {
    let warm = state.duals.as_ref().map(|(u, v)| {
        let (us, vs) = gk.scalings_from_duals(u, v);
        ScalingState { u: us, v: vs }
    });
    // Duals from a different support can starve rows of the new one; retry cold.
    let (sol, status) = match sinkhorn_solve(&gk.kernel, a, b, &cfg.sinkhorn, warm.as_ref()) {
        Err(e) if warm.is_some() && e.is_infeasible() => sinkhorn_solve(&gk.kernel, a, b, &cfg.sinkhorn, None)?,
        r => r?,
    };
    let plan = recover_plan(&sol, &gk.kernel, a, b)?;
    state.duals = Some(gk.duals(&sol.u, &sol.v));
    Ok((plan, status))
}

fn record(rec: &mut IterRecord, lambda: f64, nnz: usize, status: SinkhornStatus) {
    rec.reg.push(lambda);
    rec.support.push(nnz);
    rec.sweeps.push(status.sweeps);
}

fn ms(clock: Instant) -> f64 {
    clock.elapsed().as_secs_f64() * 1e3
}
