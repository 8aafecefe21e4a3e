use std::fmt;
use std::str::FromStr;

use crate::sinkhorn::SinkhornConfig;
use crate::sparsify::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Eralm,
    SEralm,
    Klalm,
    SKlalm,
}

impl MethodKind {
    pub fn is_sampled(self) -> bool {
        matches!(self, Self::SEralm | Self::SKlalm)
    }

    pub fn is_kl(self) -> bool {
        matches!(self, Self::Klalm | Self::SKlalm)
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Eralm => "eralm",
            Self::SEralm => "s-eralm",
            Self::Klalm => "klalm",
            Self::SKlalm => "s-klalm",
        })
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "eralm" => Ok(Self::Eralm),
            "s-eralm" | "seralm" => Ok(Self::SEralm),
            "klalm" => Ok(Self::Klalm),
            "s-klalm" | "sklalm" => Ok(Self::SKlalm),
            other => Err(format!("unknown method `{other}` (eralm, s-eralm, klalm, s-klalm)")),
        }
    }
}

/// Step sizes for the convex update of the ERALM family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// α_t = (t+1)^(−p).
    PowerDecay(f64),
    /// Constant step from the averaged-residual bound; needs L and a lower bound of f.
    Theoretical { lipschitz: f64, f_lower: f64 },
    Constant(f64),
}

/// Regularization (ERALM) or proximal (KLALM) parameter per block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegRule {
    /// σ‖v‖∞/(20 log K) from the previous dual, with v min-shifted to zero.
    Adaptive { sigma: f64 },
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodConfig {
    pub kind: MethodKind,
    pub reg: RegRule,
    pub gamma: f64,
    /// Sample size parameter; `None` means ⌊(m n)^0.75⌋.
    pub n_s: Option<usize>,
    pub t_hat: usize,
    pub tol: f64,
    pub t_max: usize,
    pub step: StepRule,
    pub sinkhorn: SinkhornConfig,
    pub seed: u64,
    pub sampler: Sampler,
    /// K in the log K of the adaptive rule; `None` means max(m, n).
    pub grid_size: Option<usize>,
}

impl MethodConfig {
    pub fn new(kind: MethodKind) -> Self {
        Self {
            kind,
            reg: RegRule::Adaptive { sigma: 1.0 },
            gamma: 0.99,
            n_s: None,
            t_hat: 0,
            tol: 1e-3,
            t_max: 10_000,
            step: StepRule::PowerDecay(0.75),
            sinkhorn: SinkhornConfig::default(),
            seed: 0,
            sampler: Sampler::Dense,
            grid_size: None,
        }
    }

    pub fn sample_size(&self, m: usize, n: usize) -> usize {
        self.n_s.unwrap_or_else(|| ((m * n) as f64).powf(0.75).floor().max(1.0) as usize)
    }
}
