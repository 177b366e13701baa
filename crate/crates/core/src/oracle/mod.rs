//! Direct time integration of the two-excitation amplitude equations on a
//! discretized continuum. Independent of the analytic long-time solution
//! apart from sharing the FC table and eigen-energies.

mod bath;
mod compare;
mod evolve;
mod state;

pub use bath::{BathGrid, RECURRENCE_MARGIN};
pub use compare::{
    extract_spectrum, run_comparison, Comparison, ComparisonReport, OracleConfig, DEFAULT_MODES,
};
pub use evolve::{default_dt, evolve, max_frequency, EvolveOptions};
pub use state::{initialize, OracleState};
