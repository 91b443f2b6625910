//! Tunable Gaussian pulse shaping for delay-Doppler integrated sensing and
//! communication.

pub mod capacity;
pub mod channel;
pub mod checks;
pub mod config;
pub mod covariance;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod pulse;
pub mod rng;
pub mod sensing;
pub mod special;
pub mod sweep;

pub use channel::{effective_channel, EffectiveChannel, Path, PathSet};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use pulse::{sample_pulse, DiscretePulse, PulseKind, PulseParams};
