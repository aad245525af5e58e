//! Coupling, time stepping and diagnostics of the closed loop.

pub mod closed_loop;
pub mod coupling;
pub mod integrator;
pub mod simulate;

pub use closed_loop::{ClosedLoop, ClosedLoopState, Derivative, EQ_ERROR_FLOOR};
pub use coupling::pcis_couple;
pub use integrator::{affine_parts, rk4_step, ExponentialStepper};
pub use simulate::{
    record, simulate, step_plan, write_trajectory_csv, DiagnosticsRecord, Integrator, SimOptions, Trajectory,
    BLOW_UP_FACTOR, TRAJECTORY_HEADER,
};
