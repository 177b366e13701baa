//! Discrete-mode two-excitation state.
//!
//! Storage convention for the two-photon amplitudes: the bath pair state
//! `|1_p 1_q⟩` (p > q) and `|2_p⟩` are normalized Fock states, and `c_{pq}`
//! is stored once per unordered pair, `p ≥ q`, row-packed
//! (`index = p(p+1)/2 + q`). A continuum amplitude `C(Δp, Δq)` normalized
//! as `∫_{p>q} |C|² = 1` maps to `c_{pq} = C dk` off the diagonal and
//! `c_{pp} = C dk / √2` on it, so `Σ_{p≥q} |c|²` is the ordered integral.

use num_complex::Complex64;
use std::f64::consts::SQRT_2;

use super::bath::BathGrid;
use crate::error::{Error, Result};
use crate::params::{normalization_g, WavepacketParams};

#[inline]
pub(crate) fn pair_index(p: usize, q: usize) -> usize {
    debug_assert!(p >= q);
    p * (p + 1) / 2 + q
}

pub(crate) fn pair_count(n_modes: usize) -> usize {
    n_modes * (n_modes + 1) / 2
}

/// Amplitudes `A_s` (two cavity photons, mechanics in `|s̃(2)⟩`),
/// `B_{s,k}` (one cavity photon, `|s̃(1)⟩`, one bath photon) and
/// `C_{j,pq}` (two bath photons, bare `|j⟩`), flattened as
/// `[A | B | C]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleState {
    pub(crate) n_b: usize,
    pub(crate) bath: BathGrid,
    pub(crate) data: Vec<Complex64>,
    pub t: f64,
    /// Discrete norm of the `G`-normalized Lorentzian before it was rescaled
    /// to one; tends to 1 in the continuum limit.
    pub initial_norm: f64,
}

impl OracleState {
    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn bath(&self) -> &BathGrid {
        &self.bath
    }

    pub(crate) fn offsets(n_b: usize, n_modes: usize) -> (usize, usize, usize) {
        let b = n_b;
        let c = b + n_b * n_modes;
        (b, c, c + n_b * pair_count(n_modes))
    }

    /// Propagates a state with an empty cavity freely back by `lead`, so the
    /// band-limited pulse front starts upstream of the cavity instead of on
    /// it. Fails if the cavity is populated.
    pub fn rewind(&mut self, lead: f64, omega_m: f64) -> Result<()> {
        if !(lead.is_finite() && lead >= 0.0) {
            return Err(Error::validation("oracle.lead_time", "must be finite and >= 0"));
        }
        if self.intracavity() > 0.0 {
            return Err(Error::validation("oracle.lead_time", "free rewind needs an empty cavity"));
        }
        let n = self.bath.n_modes;
        let (_, off, _) = Self::offsets(self.n_b, n);
        let mode: Vec<Complex64> = self
            .bath
            .detunings()
            .iter()
            .map(|d| Complex64::from_polar(1.0, d * lead))
            .collect();
        let np = pair_count(n);
        for j in 0..self.n_b {
            let level = Complex64::from_polar(1.0, j as f64 * omega_m * lead);
            let block = &mut self.data[off + j * np..off + (j + 1) * np];
            for p in 0..n {
                let row = level * mode[p];
                let start = pair_index(p, 0);
                for (q, c) in block[start..=start + p].iter_mut().enumerate() {
                    *c *= row * mode[q];
                }
            }
        }
        self.t -= lead;
        Ok(())
    }

    pub fn a(&self, s: usize) -> Complex64 {
        self.data[s]
    }

    pub fn b(&self, s: usize, k: usize) -> Complex64 {
        self.data[self.n_b + s * self.bath.n_modes + k]
    }

    /// `c_{j,pq}` for either ordering of the modes.
    pub fn c(&self, j: usize, p: usize, q: usize) -> Complex64 {
        let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
        let (_, off, _) = Self::offsets(self.n_b, self.bath.n_modes);
        self.data[off + j * pair_count(self.bath.n_modes) + pair_index(hi, lo)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Population still inside the cavity, `Σ|A|² + Σ|B|²`.
    pub fn intracavity(&self) -> f64 {
        let (_, c, _) = Self::offsets(self.n_b, self.bath.n_modes);
        self.data[..c].iter().map(|x| x.norm_sqr()).sum()
    }

    /// Two-photon spectral density `Σ_j |C_j(Δp, Δq)|²` at mode `(p, q)`.
    pub fn density(&self, p: usize, q: usize) -> f64 {
        let dk = self.bath.spacing();
        let w = if p == q { 2.0 } else { 1.0 };
        (0..self.n_b)
            .map(|j| self.c(j, p, q).norm_sqr())
            .sum::<f64>()
            * w
            / (dk * dk)
    }
}

/// Symmetrized Lorentzian pair `G [L1(p) L2(q) + L1(q) L2(p)]` on the
/// modes, placed in the `n0` phonon channel and rescaled to unit norm.
///
/// Fails if less than `min_fraction` of the continuum norm falls inside the
/// band.
pub fn initialize(
    wp: &WavepacketParams,
    n0: usize,
    n_b: usize,
    bath: &BathGrid,
    min_fraction: f64,
) -> Result<OracleState> {
    wp.validate()?;
    if n0 >= n_b {
        return Err(Error::Range {
            what: "initial phonon number in oracle basis",
            index: n0,
            max: n_b.saturating_sub(1),
        });
    }
    let n = bath.n_modes;
    let dk = bath.spacing();
    let g = normalization_g(wp);
    let det = bath.detunings();
    let lor = |x: f64, d: f64| 1.0 / Complex64::new(x - d, wp.epsilon);
    let (_, off, len) = OracleState::offsets(n_b, n);
    let mut data = vec![Complex64::new(0.0, 0.0); len];
    let c0 = off + n0 * pair_count(n);
    for p in 0..n {
        for q in 0..=p {
            let amp = g
                * (lor(det[p], wp.delta1) * lor(det[q], wp.delta2)
                    + lor(det[q], wp.delta1) * lor(det[p], wp.delta2));
            let w = if p == q { dk / SQRT_2 } else { dk };
            data[c0 + pair_index(p, q)] = amp * w;
        }
    }
    let norm: f64 = data.iter().map(|x| x.norm_sqr()).sum();
    if norm < min_fraction {
        return Err(Error::validation(
            "oracle.bandwidth",
            format!("band holds {norm:.5} of the wavepacket norm, need {min_fraction}"),
        ));
    }
    let scale = 1.0 / norm.sqrt();
    data.iter_mut().for_each(|x| *x *= scale);
    Ok(OracleState {
        n_b,
        bath: *bath,
        data,
        t: 0.0,
        initial_norm: norm,
    })
}
