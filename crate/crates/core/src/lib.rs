//! Physical-layer security of multiuser scheduling in underlay cognitive radio.
//!
//! Three transmission schemes are simulated over Rayleigh fading:
//! secrecy-optimal user scheduling, rate-optimal user scheduling, and
//! artificial-noise beamforming across all users. [`montecarlo`] estimates
//! their ergodic secrecy rates and intercept probabilities; [`analytic`]
//! evaluates the closed-form and high-MER intercept expressions used to
//! cross-check those estimates.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod numeric;

pub use error::{Error, Result};
pub use model::{ChannelRealization, Scheme, SchemeOutcome, SystemConfig};
pub use montecarlo::{EstimateResult, Metric, SweepRow};
