//! Exponential-basis boundary matrices for the twelve adjoint spectral
//! problems, the reflected operator B and its eigenmodes, and explicit
//! uncontrollable modes on 𝒩.

mod basis;
mod boundary;
mod cases;
mod constants;
mod modes;
mod operator_b;
mod sweep;

pub use boundary::{boundary_matrix, AdjointBasis, AdjointSolution, SpectralCoefficients};
pub use cases::{CaseSpec, End, Field, TraceFunctional};
pub use constants::{case5_constants, zeta, zeta_infimum, Case5Constants, ZetaInfimum};
pub use modes::{
    eigenfunction_samples, lift_to_A, second_trace_ratio, uncontrollable_mode, AEigenMode, UncontrollableMode,
};
pub use operator_b::{
    b_sigma_min, char_det_b, eig_b, eig_b_allow_resonant, EigenPair, Spectrum, BAND, SPECTRUM_CSV_HEADER,
};
pub use sweep::{default_p_grid, min_sv, min_sv_sweep, refine_dip, Dip, SweepReport};

/// True if `l` is within 1e−9 relative of a positive multiple of 2π.
pub fn is_resonant_length(l: f64) -> bool {
    let m = (l / std::f64::consts::TAU).round();
    m >= 1.0 && (l - m * std::f64::consts::TAU).abs() <= 1e-9 * l
}
