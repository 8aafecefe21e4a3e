use anyhow::Result;
use clap::Args;
use otbcd::methods::{MethodConfig, MethodKind, RegRule, StepRule};
use otbcd::sparsify::Sampler;

use crate::settings::KeyValues;

#[derive(Args, Clone, Debug, Default)]
pub struct MethodArgs {
    /// eralm, s-eralm, klalm or s-klalm.
    #[arg(long)]
    pub method: Option<MethodKind>,
    /// Interpolation factor of the sampling mixture.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Scale of the adaptive regularization rule.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fixed regularization/proximal parameter (overrides --sigma).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<usize>,
    /// Iteration at which S-KLALM samples and freezes its support.
    #[arg(long = "t-hat")]
    pub t_hat: Option<usize>,
    /// Sample size parameter (default ⌊(mn)^0.75⌋).
    #[arg(long = "n-s")]
    pub n_s: Option<usize>,
    /// dense or accelerated.
    #[arg(long)]
    pub sampler: Option<Sampler>,
    /// Exponent p of the step rule α_t = (t+1)^(−p).
    #[arg(long = "step-power")]
    pub step_power: Option<f64>,
    #[arg(long = "sinkhorn-max")]
    pub sinkhorn_max: Option<usize>,
    #[arg(long = "feas-tol")]
    pub feas_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl MethodArgs {
    pub fn resolve(&self, cfg: &KeyValues, default_kind: MethodKind) -> Result<MethodConfig> {
        let kind = cfg.pick(self.method, "method", default_kind)?;
        let mut m = MethodConfig::new(kind);
        m.gamma = cfg.pick(self.gamma, "gamma", m.gamma)?;
        m.reg = match cfg.pick_opt(self.lambda, "lambda")? {
            Some(l) => RegRule::Fixed(l),
            None => RegRule::Adaptive { sigma: cfg.pick(self.sigma, "sigma", 1.0)? },
        };
        m.tol = cfg.pick(self.tol, "tol", m.tol)?;
        m.t_max = cfg.pick(self.t_max, "t_max", m.t_max)?;
        m.t_hat = cfg.pick(self.t_hat, "t_hat", m.t_hat)?;
        m.n_s = cfg.pick_opt(self.n_s, "n_s")?;
        m.sampler = cfg.pick(self.sampler, "sampler", m.sampler)?;
        m.step = StepRule::PowerDecay(cfg.pick(self.step_power, "step_power", 0.75)?);
        m.sinkhorn.s_max = cfg.pick(self.sinkhorn_max, "sinkhorn_max", m.sinkhorn.s_max)?;
        m.sinkhorn.feas_tol = cfg.pick(self.feas_tol, "feas_tol", m.sinkhorn.feas_tol)?;
        m.seed = cfg.pick(self.seed, "seed", 0)?;
        Ok(m)
    }
}

pub fn record(m: &MethodConfig, kv: &mut KeyValues, prefix: &str) {
    kv.set(&format!("{prefix}method"), m.kind);
    kv.set(&format!("{prefix}gamma"), m.gamma);
    match m.reg {
        RegRule::Adaptive { sigma } => kv.set(&format!("{prefix}sigma"), sigma),
        RegRule::Fixed(l) => kv.set(&format!("{prefix}lambda"), l),
    }
    kv.set(&format!("{prefix}tol"), m.tol);
    kv.set(&format!("{prefix}t_max"), m.t_max);
    kv.set(&format!("{prefix}t_hat"), m.t_hat);
    if let Some(n) = m.n_s {
        kv.set(&format!("{prefix}n_s"), n);
    }
    kv.set(&format!("{prefix}sampler"), m.sampler);
    if let StepRule::PowerDecay(p) = m.step {
        kv.set(&format!("{prefix}step_power"), p);
    }
    kv.set(&format!("{prefix}seed"), m.seed);
}
