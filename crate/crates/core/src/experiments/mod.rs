//! Error sweeps against composites, order fits and scaling checks.

mod config;
mod fit;
mod plot;
mod sweep;
mod verify;

pub use config::*;
pub use fit::*;
pub use plot::*;
pub use sweep::*;
pub use verify::*;
