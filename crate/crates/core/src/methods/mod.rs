//! Outer-loop drivers for ERALM, S-ERALM, KLALM and S-KLALM.

mod config;
mod driver;
mod plans;
mod record;
mod scaling;
mod schedule;

pub use config::{MethodConfig, MethodKind, RegRule, StepRule};
pub use driver::{run, run_eralm, run_klalm, run_s_eralm, run_s_klalm, Observer};
pub use plans::{convex_update, delta_metric, densified, initial_plans, random_feasible_plan, weighted_diff_sq};
pub use record::{IterRecord, Phases, RunRecord, StopReason, TRACE_SCHEMA};
pub use scaling::{fit_power_law, PowerLaw};
pub use schedule::{
    adaptive_parameter, power_decay, residual_bound, theoretical_step, theoretical_t_min, PARAMETER_FLOOR,
};
