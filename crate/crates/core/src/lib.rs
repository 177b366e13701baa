//! Exact long-time two-photon scattering in a mixed (linear + quadratic)
//! cavity optomechanical system.
//!
//! * [`fock`]: squeezed-displaced mechanical eigenbases and their
//!   Franck–Condon overlaps, with a truncated-matrix reference.
//! * [`spectral`]: eigen-energies, scattering amplitudes, joint spectra,
//!   resonance lines and peak analysis.
//! * [`oracle`]: direct time integration of the amplitude equations on a
//!   discretized continuum, for validating the analytic solution.
//! * [`config`] / [`run`]: JSON run configurations, figure presets and the
//!   job runner behind the `optoscatter` CLI.

pub mod config;
pub mod error;
pub mod exec;
pub mod export;
pub mod fock;
pub mod oracle;
pub mod params;
pub mod presets;
pub mod run;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fock::FcTable;
pub use params::{normalization_g, MechanicalInitState, ModelParams, WavepacketParams};
pub use spectral::{ScatteringModel, SpectrumGrid, Truncation};
