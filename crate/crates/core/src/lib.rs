pub mod control;
pub mod energy;
pub mod error;
pub mod grid;
pub mod plant;
pub mod scenario;
pub mod sim;
pub mod stencil;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
