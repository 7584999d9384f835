//! Critical lengths, spectral problems, conservative simulation and boundary
//! control for the linearized KdV-KdV Boussinesq system on a bounded interval.

pub mod acceptance;
pub mod config;
pub mod control;
pub mod critical;
pub mod error;
pub mod io;
pub mod numerics;
pub mod sim;
pub mod spectral;

pub use error::{KdvError, Result};
pub use numerics::C64;
