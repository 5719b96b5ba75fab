//! Quantum dynamics of multichain, axially symmetric two-level lattices
//! coupled to a single quantized field mode: Rabi wave packets,
//! collapse/revival of the integral inversion, and its spectrum.

pub mod circulant;
pub mod cli;
pub mod config;
pub mod continuum;
pub mod discrete;
pub mod error;
pub mod model;
pub mod observables;
pub mod output;

pub use circulant::Circulant;
pub use error::{Error, Result};
pub use model::{AmplitudeField, SystemParams};
pub use observables::{Spectrum, TimeSeries};
