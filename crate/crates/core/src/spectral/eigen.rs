use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::squeeze_factor;
use crate::params::{ModelParams, MAX_PHOTONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    /// Frame rotating at `ω_c` for both cavity and continuum.
    Rotating,
}

/// Energy of `|m⟩_a |j̃(m)⟩_b`.
pub fn eigen_energy(m: usize, j: usize, params: &ModelParams, frame: Frame) -> Result<f64> {
    if m > MAX_PHOTONS {
        return Err(Error::Range {
            what: "photon number",
            index: m,
            max: MAX_PHOTONS,
        });
    }
    let w = params.omega_m;
    let r = squeeze_factor(m, params)?;
    let mf = m as f64;
    let scale = (2.0 * r).exp();
    let rotating = -params.g1 * params.g1 * (-4.0 * r).exp() * mf * mf / w
        + j as f64 * w * scale
        + 0.5 * w * (scale - 1.0);
    match frame {
        Frame::Rotating => Ok(rotating),
        Frame::Lab => {
            let wc = params.omega_c.ok_or(Error::MissingCavityFrequency)?;
            Ok(mf * wc + rotating)
        }
    }
}

/// Single-photon ground-state shift `δ = g1² e^{−4r_1}/ω_M − (ω_M/2)(e^{2r_1} − 1)`.
pub fn delta_shift(params: &ModelParams) -> Result<f64> {
    let w = params.omega_m;
    let r1 = squeeze_factor(1, params)?;
    Ok(params.g1 * params.g1 * (-4.0 * r1).exp() / w - 0.5 * w * ((2.0 * r1).exp() - 1.0))
}

/// Two-photon ground-state shift `ν = 4 g1² e^{−4r_2}/ω_M − (ω_M/2)(e^{2r_2} − 1)`.
pub fn nu_shift(params: &ModelParams) -> Result<f64> {
    let w = params.omega_m;
    let r2 = squeeze_factor(2, params)?;
    Ok(4.0 * params.g1 * params.g1 * (-4.0 * r2).exp() / w - 0.5 * w * ((2.0 * r2).exp() - 1.0))
}

/// Rotating-frame spectrum of the one- and two-photon sectors up to a
/// phonon cutoff, plus the derived shifts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenData {
    pub r1: f64,
    pub r2: f64,
    pub delta_shift: f64,
    pub nu_shift: f64,
    /// `E′(1, s)` for `s ≤ max_index`.
    pub e1: Vec<f64>,
    /// `E′(2, s)` for `s ≤ max_index`.
    pub e2: Vec<f64>,
}

impl EigenData {
    pub fn new(params: &ModelParams, max_index: usize) -> Result<Self> {
        let sector = |m| {
            (0..=max_index)
                .map(|s| eigen_energy(m, s, params, Frame::Rotating))
                .collect::<Result<Vec<_>>>()
        };
        Ok(EigenData {
            r1: squeeze_factor(1, params)?,
            r2: squeeze_factor(2, params)?,
            delta_shift: delta_shift(params)?,
            nu_shift: nu_shift(params)?,
            e1: sector(1)?,
            e2: sector(2)?,
        })
    }

    /// Phonon spacing `ω_M e^{2 r_m}` in the `m`-photon sector.
    pub fn phonon_spacing(&self, m: usize, omega_m: f64) -> f64 {
        match m {
            0 => omega_m,
            1 => omega_m * (2.0 * self.r1).exp(),
            _ => omega_m * (2.0 * self.r2).exp(),
        }
    }
}
