//! Truncated-matrix reference for the Franck–Condon factors.
//!
//! Builds `S(r)` and `D(α)` as matrix exponentials of their generators on a
//! finite Fock space and multiplies them out. Shares nothing with the
//! closed form except the squeeze/displacement parameters.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::squeeze::SqueezeDisplace;
use crate::error::{Error, Result};
use crate::params::{ModelParams, MAX_PHOTONS};

/// Convergence threshold for the dimension-doubling loop.
pub const ORACLE_TOL: f64 = 1e-10;
/// Hard cap on the truncated Fock dimension.
pub const ORACLE_MAX_DIM: usize = 1024;

/// Minimum starting dimension for matrix elements up to `max_index`.
pub fn oracle_min_dim(max_index: usize) -> usize {
    4 * max_index + 40
}

fn annihilation(dim: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        b[(n - 1, n)] = (n as f64).sqrt();
    }
    b
}

/// `S(r_m) D(α_m)` on a `dim`-dimensional Fock space.
fn basis_unitary(sd: &SqueezeDisplace, b: &DMatrix<f64>) -> DMatrix<f64> {
    let bd = b.transpose();
    let squeeze_gen = (b * b - &bd * &bd) * (0.5 * sd.r);
    let disp_gen = (&bd - b) * sd.alpha;
    squeeze_gen.exp() * disp_gen.exp()
}

fn overlap_block(m: usize, n: usize, params: &ModelParams, dim: usize, keep: usize) -> Result<DMatrix<f64>> {
    let b = annihilation(dim);
    let um = basis_unitary(&SqueezeDisplace::new(m, params)?, &b);
    let un = basis_unitary(&SqueezeDisplace::new(n, params)?, &b);
    let full = um.transpose() * un;
    Ok(full.view((0, 0), (keep, keep)).into_owned())
}

/// Block of `⟨j̃(m)|s̃(n)⟩` for `j, s ≤ max_index`, doubling the Fock
/// dimension from `start_dim` until the block moves by less than
/// [`ORACLE_TOL`].
pub fn oracle_overlap_matrix(
    m: usize,
    n: usize,
    params: &ModelParams,
    max_index: usize,
    start_dim: usize,
) -> Result<DMatrix<Complex64>> {
    if m > MAX_PHOTONS || n > MAX_PHOTONS {
        return Err(Error::Range {
            what: "photon number",
            index: m.max(n),
            max: MAX_PHOTONS,
        });
    }
    let min = oracle_min_dim(max_index);
    if start_dim < min {
        return Err(Error::validation(
            "dim",
            format!("oracle dimension {start_dim} below required minimum {min}"),
        ));
    }
    let keep = max_index + 1;
    let mut dim = start_dim;
    let mut current = overlap_block(m, n, params, dim, keep)?;
    loop {
        let next_dim = 2 * dim;
        if next_dim > ORACLE_MAX_DIM {
            return Err(Error::Convergence {
                what: format!("overlap oracle (m={m}, n={n})"),
                achieved: f64::NAN,
                tolerance: ORACLE_TOL,
            });
        }
        let next = overlap_block(m, n, params, next_dim, keep)?;
        let change = (&next - &current).amax();
        current = next;
        dim = next_dim;
        if change < ORACLE_TOL {
            break;
        }
    }
    Ok(current.map(|x| Complex64::new(x, 0.0)))
}

/// Single matrix element `⟨j̃(m)|s̃(n)⟩` from the truncated-matrix oracle.
pub fn oracle_overlap(
    m: usize,
    j: usize,
    n: usize,
    s: usize,
    params: &ModelParams,
    dim: usize,
) -> Result<Complex64> {
    let block = oracle_overlap_matrix(m, n, params, j.max(s), dim)?;
    Ok(block[(j, s)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::overlap::{fc_overlap, overlap_closed_form};

    #[test]
    fn trivial_cases() {
        let p = ModelParams::new(0.5, 0.0, 0.1).unwrap();
        let v = oracle_overlap(0, 0, 0, 0, &p, 40).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
        let coh = oracle_overlap(0, 0, 1, 0, &p, 40).unwrap();
        assert!((coh.re - (-0.125f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dimension_precondition() {
        let p = ModelParams::new(0.5, 0.0, 0.1).unwrap();
        assert!(matches!(oracle_overlap(0, 3, 1, 0, &p, 20), Err(Error::Validation { .. })));
    }

    #[test]
    fn matches_closed_form_examples() {
        // ⟨2| S(0.1) D(0.2) |0⟩ through an equivalent parameter set:
        // m = 0 → n = 1 has r = r_1, α = α_1.
        let g2 = ((4.0f64 * 0.1).exp() - 1.0) / 4.0;
        let g1 = 0.2 / (-3.0f64 * 0.1).exp();
        let p = ModelParams::new(-g1, g2, 0.1).unwrap();
        let oracle = oracle_overlap(0, 2, 1, 0, &p, 48).unwrap();
        let closed = overlap_closed_form(2, 0, 0.1, Complex64::new(0.2, 0.0)).unwrap();
        assert!((oracle - closed).norm() < 1e-10, "{oracle} vs {closed}");

        let p = ModelParams::new(0.8, 0.05, 0.1).unwrap();
        let oracle = oracle_overlap(1, 0, 2, 0, &p, 40).unwrap();
        let closed = fc_overlap(1, 0, 2, 0, &p).unwrap();
        assert!((oracle - closed).norm() < 1e-8);
    }
}
