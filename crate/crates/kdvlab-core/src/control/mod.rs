//! Observability Gramians on modal truncations, minimal-norm boundary control
//! synthesis and observability sweeps over the length.

mod gramian;
mod hum;
mod sweep;

pub use gramian::{
    gramian_from_pairs, gramian_matrix, mode_coordinates, observability_gramian, observability_gramian_allow_resonant, trace_row,
    GramianReport, GRAMIAN_CSV_HEADER,
};
pub use hum::{
    hum_control, signal_norm_sq, verify_terminal, HumSolution, TerminalReport, CONDITION_CAP, CONTROL_TRACE,
};
pub use sweep::{observability_sweep, ObsDip, ObsPoint, ObsSweepReport, DIP_RATIO, OBS_CSV_HEADER};

