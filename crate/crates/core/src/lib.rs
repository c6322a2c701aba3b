//! Stochastic Lang-Kobayashi simulation of a semiconductor laser with delayed
//! optical feedback, band-limited noise injection, and the metrics used to
//! judge time-delay-signature suppression: ACF peak `C_p`, permutation
//! entropy, 80 % bandwidth and intensity skewness.

pub mod analysis;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod model;
pub mod noise;
pub mod seed;
pub mod series;
pub mod trace;

pub use error::{Error, Result};
pub use integrator::{run_experiment, RunConfig, SimConfig};
pub use model::{LaserParams, LaserState};
pub use noise::NoiseSpec;
pub use series::TimeSeries;
