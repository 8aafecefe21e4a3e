use std::io::Write;

use ndarray::Array1;

use super::config::MethodKind;
use crate::error::Result;
use crate::polytope::Plan;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Tol,
    TMax,
}

/// Wall-clock milliseconds per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Phases {
    pub gradient_ms: f64,
    pub sampling_ms: f64,
    pub kernel_ms: f64,
    pub sinkhorn_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterRecord {
    /// 1-based index of the iterate produced.
    pub t: usize,
    pub delta: f64,
    pub objective: f64,
    pub alpha: f64,
    /// λ or μ per block.
    pub reg: Vec<f64>,
    /// Kernel entries per block.
    pub support: Vec<usize>,
    pub sweeps: Vec<usize>,
    pub resamples: usize,
    pub wall_ms: f64,
    pub phases: Phases,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub kind: MethodKind,
    pub seed: u64,
    pub iterations: Vec<IterRecord>,
    pub initial_objective: f64,
    pub plans: Vec<Plan>,
    /// True-scale dual potentials (u_i, v_i) of the last subproblem per block.
    pub duals: Vec<(Array1<f64>, Array1<f64>)>,
    pub stop: StopReason,
    pub resamples: usize,
    pub parameter_floor_hits: usize,
    pub wall_ms: f64,
}

pub const TRACE_SCHEMA: &str = "otbcd-trace/1";

impl RunRecord {
    pub fn final_objective(&self) -> f64 {
        self.iterations.last().map_or(self.initial_objective, |r| r.objective)
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.delta).collect()
    }

    /// `t,delta,objective,support_total,sinkhorn_sweeps,wall_ms`, preceded by a
    /// schema comment. Timing is written as 0 when `timing` is false.
    pub fn write_csv(&self, mut out: impl Write, timing: bool) -> Result<()> {
        writeln!(out, "# {TRACE_SCHEMA} method={} seed={}", self.kind, self.seed)?;
        writeln!(out, "t,delta,objective,support_total,sinkhorn_sweeps,wall_ms")?;
        for r in &self.iterations {
            let wall = if timing { r.wall_ms } else { 0.0 };
            writeln!(
                out,
                "{},{:.17e},{:.17e},{},{},{:.3}",
                r.t,
                r.delta,
                r.objective,
                r.support.iter().sum::<usize>(),
                r.sweeps.iter().sum::<usize>(),
                wall
            )?;
        }
        Ok(())
    }

    /// Per-phase timings, one row per iteration.
    pub fn write_timing_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "t,gradient_ms,sampling_ms,kernel_ms,sinkhorn_ms,wall_ms")?;
        for r in &self.iterations {
            let p = r.phases;
            writeln!(
                out,
                "{},{:.3},{:.3},{:.3},{:.3},{:.3}",
                r.t, p.gradient_ms, p.sampling_ms, p.kernel_ms, p.sinkhorn_ms, r.wall_ms
            )?;
        }
        Ok(())
    }
}
