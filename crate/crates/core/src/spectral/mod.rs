//! Eigen-energies, long-time scattering amplitudes and joint spectra.

mod amplitude;
mod eigen;
pub mod peaks;
mod resonance;
mod spectrum;

pub use amplitude::{AmplitudeBreakdown, Channels, ScatteringModel, Scratch, Truncation, OUTPUT_PHASE};
pub use eigen::{delta_shift, eigen_energy, nu_shift, EigenData, Frame};
pub use resonance::{nearest_line, resonance_lines, Channel, Geometry, QuantumNumbers, ResonanceLine};
pub use spectrum::{
    converge_truncation, diagonal_spectrum, probe_points, spectrum_grid, spectrum_point,
    truncation_change, DiagonalCut, SpectrumGrid, SpectrumMeta, TruncationRecord,
};
