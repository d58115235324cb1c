//! Direct simulation of vehicles on a circuit, wave extraction and trajectory
//! reconstruction from a traveling-wave profile.

mod io;
mod reconstruct;
mod sim;
mod wave;

pub use io::write_trajectories;
pub use reconstruct::{ov_residual_check, Reconstruction, Trajectories, MIN_QUADRATURE_INTERVALS};
pub use sim::{simulate, step_rk4, HeadwaySeries, RingState, SimulationOptions};
pub use wave::{estimate_wave_speed, extract_profile, ExtractedProfile, WaveSpeed};
