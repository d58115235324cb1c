//! Fourier pseudospectral solver for periodic traveling waves, continuation in the
//! steepness `β`, and a finite-difference solver for truncated fronts.

mod banded;
mod continuation;
pub mod fft;
mod grid;
mod heteroclinic;
pub mod io;
mod newton;

pub use banded::{Banded, BandedLu};
pub use continuation::{
    continue_in_beta, default_points, log_ladder, ContinuationOptions, ContinuationRun, Resolution, StepRecord,
    FINE_GRID_BETA,
};
pub use grid::{max_abs, mean, SpectralGrid};
pub use heteroclinic::{solve_heteroclinic_truncated, HeteroclinicOptions, HeteroclinicSolution};
pub use newton::{
    extract_diagnostics, newton_solve_periodic, residual, residual_kind, residual_modified, MeanConstraint,
    NewtonOptions, PeriodicSolution,
};

/// Jacobian of the plain residual as a dense row-major matrix (diagnostics and tests).
pub fn residual_jacobian_dense(
    p: &crate::OVParams,
    grid: &SpectralGrid,
    u: &[f64],
    c: f64,
) -> Vec<Vec<f64>> {
    let j = newton::residual_jacobian(p, crate::OvKind::Tanh, grid, u, c);
    (0..u.len()).map(|i| (0..u.len()).map(|k| j[(i, k)]).collect()).collect()
}
