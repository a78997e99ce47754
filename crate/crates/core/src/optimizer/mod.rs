//! Susceptance and power design for the wideband BD-RIS link.
//!
//! The design runs in two decoupled stages. The component susceptances at the
//! center frequency are chosen to maximize the sum over subcarriers of the
//! channel gain (equal power per subcarrier), after squashing unconstrained
//! variables into the tuning range. Power is then water-filled once over the
//! resulting channels.

mod design;
pub mod lbfgs;
mod objective;
mod power;
mod squash;

pub use design::{
    baseline_flat_design, evaluate_design, optimize_bdris, optimize_bdris_with_starts, wideband_design, BdrisSolution,
    DesignResult, LinkBudget, OptimizerOptions, TracePoint,
};
pub use objective::{gain_gradient, gain_objective, DesignVariables, GainProblem};
pub use power::{average_rate, jensen_bound, water_filling, PowerAllocation};
pub use squash::SquashParams;
