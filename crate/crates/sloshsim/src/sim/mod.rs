//! Scenario assembly, the coupled stepping loops, trace recording, and
//! regime numbers.

pub mod coupled;
pub mod dimensionless;
pub mod scenario;
pub mod trace;

pub use coupled::{
    closed_loop_init, coupled_step, run, run_closed_loop, run_open_loop, CoupledState, LoopMode,
    StepInfo,
};
pub use dimensionless::{dimensionless, scenario_dimensionless, DimensionlessSet};
pub use scenario::{InitialConditions, Scenario};
pub use trace::{mode_value, Channel, Trace, TraceMeta, TraceRow};
