//! Traveling stop-and-go waves of the optimal-velocity (OV) car-following model.
//!
//! Vehicles on a ring obey `x_n'' = a (V(x_{n+1} - x_n) - x_n')`. Writing the headway
//! as a traveling wave `x_{n+1}(τ) - x_n(τ) = u(cτ + n - 1)` turns the ring into a single
//! difference-differential equation for the profile `u`:
//!
//! ```text
//! c² u''(t) + a c u'(t) = a (V(u(t + 1)) - V(u(t)))
//! ```
//!
//! The crate is organised around that equation:
//!
//! - [`model`]: OV parameters, the tanh velocity function and its step-function limit.
//! - [`limit`]: closed-form transition layers of the step-function limit.
//! - [`composite`]: cutoff functions and glued homoclinic/periodic approximations.
//! - [`spectral`]: Fourier pseudospectral Newton solver, β-continuation and a
//!   finite-difference solver for truncated heteroclinic fronts.
//! - [`ring`]: direct simulation of the ring, wave extraction and trajectory reconstruction.
//! - [`experiments`]: error sweeps, convergence-order fits and scaling checks.

pub mod composite;
pub mod error;
pub mod experiments;
pub mod jet;
pub mod limit;
pub mod model;
pub mod profile;
pub mod ring;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{OVParams, OvKind};
