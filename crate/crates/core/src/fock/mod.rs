//! Squeezed-displaced number states and their generalized Franck–Condon
//! overlaps.

mod hermite;
mod oracle;
mod overlap;
mod squeeze;
mod table;

pub use hermite::{hermite_complex, scaled_hermite_table};
pub use oracle::{oracle_min_dim, oracle_overlap, oracle_overlap_matrix, ORACLE_MAX_DIM, ORACLE_TOL};
pub use overlap::{
    displaced_number_overlap, fc_overlap, overlap_closed_form, relative_transform, MAX_FOCK_INDEX,
    SMALL_SQUEEZE,
};
pub use squeeze::{displacement, squeeze_factor, SqueezeDisplace};
pub use table::{FcEntry, FcTable};
