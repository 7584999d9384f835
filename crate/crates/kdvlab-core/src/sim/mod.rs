//! Conservative finite-difference simulation of the linear, feedback,
//! nonhomogeneous and nonlinear systems, diagnostics, and the exact modal propagator.

mod diagnostics;
mod generator;
mod grid;
mod modal;
mod stepper;

pub use diagnostics::{decay_fit, decay_fit_trace, diagnostics, DecayFit, EnergyTrace, ENERGY_CSV_HEADER};
pub use generator::{traces, Generator};
pub use grid::{Grid, StateField};
pub use modal::{propagate_modal, rotate, smallest_pairs, ModalBasis, ModalPropagation};
pub use stepper::{
    boundary_inputs, lifting, nonlinear_term, simulate, simulate_with, BoundaryData, Mode, Sample, Scheme, SimConfig,
    StepInput, Stepper, TimeSeries, Trajectory, DATA_NAMES,
};
