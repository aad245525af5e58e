//! Finite-dimensional controller, structural-invariant checks and the
//! controller designs for the two examples.

pub mod casimir;
pub mod controller;
pub mod synthesis;

pub use casimir::{casimir_residuals_prop1, casimir_residuals_prop2, CasimirSpec, ResidualEntry, ResidualReport};
pub use controller::{grad_hc, Controller, ControllerHamiltonian};
pub use synthesis::{
    compute_feedforward, desired_beam_shape, desired_plate_shape, synthesize_beam_controller,
    synthesize_plate_controller, ControllerGains, DesiredEquilibrium, Feedforward,
};
