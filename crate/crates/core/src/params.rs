//! Physical parameter sets: the optomechanical cavity, the incoming
//! two-photon wavepacket and the initial mechanical state.
//!
//! All frequencies are angular frequencies. Internally everything is
//! expressed in units of `omega_m`; the field is kept so that results can
//! be written back in absolute units.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Highest cavity photon number reachable in the two-photon sector.
pub const MAX_PHOTONS: usize = 2;

/// Constants of the mixed (linear + quadratic) optomechanical cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mechanical angular frequency.
    #[serde(default = "one")]
    pub omega_m: f64,
    /// First-order (linear) optomechanical coupling.
    pub g1: f64,
    /// Quadratic optomechanical coupling.
    pub g2: f64,
    /// Cavity energy decay rate into the external continuum.
    pub gamma_c: f64,
    /// Absolute cavity frequency; only needed for lab-frame energies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl ModelParams {
    /// Builds and validates a parameter set with `omega_m = 1`.
    pub fn new(g1: f64, g2: f64, gamma_c: f64) -> Result<Self> {
        let p = ModelParams {
            omega_m: 1.0,
            g1,
            g2,
            gamma_c,
            omega_c: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_m", self.omega_m),
            ("g1", self.g1),
            ("g2", self.g2),
            ("gamma_c", self.gamma_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(name, "must be finite"));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(Error::validation("omega_m", "must be > 0"));
        }
        if self.gamma_c <= 0.0 {
            return Err(Error::validation("gamma_c", "must be > 0"));
        }
        if let Some(wc) = self.omega_c {
            if !wc.is_finite() {
                return Err(Error::validation("omega_c", "must be finite"));
            }
        }
        for m in 0..=MAX_PHOTONS {
            let arg = 1.0 + 4.0 * self.g2 * m as f64 / self.omega_m;
            if arg <= 0.0 {
                return Err(Error::validation(
                    "g2",
                    format!("1 + 4 g2 m / omega_m = {arg} must be > 0 for m = {m}"),
                ));
            }
        }
        Ok(())
    }

    /// Coupling of the cavity to the external continuum, `sqrt(gamma_c / 2π)`.
    pub fn xi(&self) -> f64 {
        (self.gamma_c / (2.0 * PI)).sqrt()
    }

    /// Copy of these parameters expressed in units of `omega_m`.
    pub fn in_mechanical_units(&self) -> ModelParams {
        let w = self.omega_m;
        ModelParams {
            omega_m: 1.0,
            g1: self.g1 / w,
            g2: self.g2 / w,
            gamma_c: self.gamma_c / w,
            omega_c: self.omega_c.map(|c| c / w),
        }
    }
}

/// Two-photon Lorentzian input wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketParams {
    /// Detuning of the first photon from the cavity, `ω1 − ωc`.
    pub delta1: f64,
    /// Detuning of the second photon from the cavity, `ω2 − ωc`.
    pub delta2: f64,
    /// Spectral half-width of each photon.
    pub epsilon: f64,
}

impl WavepacketParams {
    pub fn new(delta1: f64, delta2: f64, epsilon: f64) -> Result<Self> {
        let wp = WavepacketParams {
            delta1,
            delta2,
            epsilon,
        };
        wp.validate()?;
        Ok(wp)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta1.is_finite() {
            return Err(Error::validation("delta1", "must be finite"));
        }
        if !self.delta2.is_finite() {
            return Err(Error::validation("delta2", "must be finite"));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::validation("epsilon", "must be finite and > 0"));
        }
        Ok(())
    }

    /// The same wavepacket with the two photon detunings exchanged.
    pub fn swapped(&self) -> Self {
        WavepacketParams {
            delta1: self.delta2,
            delta2: self.delta1,
            epsilon: self.epsilon,
        }
    }

    /// Normalization constant `G` of the symmetrized Lorentzian product.
    pub fn normalization(&self) -> f64 {
        normalization_g(self)
    }
}

/// `G = (ε/π) · (1 + 4ε² / ((Δ1 − Δ2)² + 4ε²))^(−1/2)`.
pub fn normalization_g(wp: &WavepacketParams) -> f64 {
    let e = wp.epsilon;
    let d = wp.delta1 - wp.delta2;
    let four_e2 = 4.0 * e * e;
    (e / PI) / (1.0 + four_e2 / (d * d + four_e2)).sqrt()
}

/// Initial state of the mechanical oscillator in the Fock basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechanicalInitState {
    /// `Σ c_n |n⟩`; amplitudes stored as `[re, im]` pairs on disk.
    Pure { amplitudes: Vec<Complex64> },
    /// `Σ P_n |n⟩⟨n|`.
    Mixed { probabilities: Vec<f64> },
}

const STATE_NORM_TOL: f64 = 1e-12;

impl MechanicalInitState {
    /// The mechanical ground state `|0⟩` as a pure state.
    pub fn ground() -> Self {
        MechanicalInitState::Pure {
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Number state `|n⟩` as a pure state.
    pub fn number(n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n + 1];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        MechanicalInitState::Pure { amplitudes }
    }

    /// Thermal occupation `P_n ∝ (n̄/(n̄+1))^n`, truncated at `max_n0` and
    /// renormalized.
    pub fn thermal(mean: f64, max_n0: usize) -> Result<Self> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::validation("state.mean", "must be finite and >= 0"));
        }
        let ratio = mean / (mean + 1.0);
        let mut probabilities: Vec<f64> = (0..=max_n0).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = probabilities.iter().sum();
        probabilities.iter_mut().for_each(|p| *p /= total);
        Ok(MechanicalInitState::Mixed { probabilities })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MechanicalInitState::Pure { amplitudes } => {
                if amplitudes.is_empty() {
                    return Err(Error::validation("state.amplitudes", "must not be empty"));
                }
                if amplitudes.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::validation("state.amplitudes", "must be finite"));
                }
                let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
                if (norm - 1.0).abs() > STATE_NORM_TOL {
                    return Err(Error::validation(
                        "state.amplitudes",
                        format!("squared norm is {norm}, expected 1"),
                    ));
                }
            }
            MechanicalInitState::Mixed { probabilities } => {
                if probabilities.is_empty() {
                    return Err(Error::validation("state.probabilities", "must not be empty"));
                }
                if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(Error::validation(
                        "state.probabilities",
                        "entries must be finite and >= 0",
                    ));
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > STATE_NORM_TOL {
                    return Err(Error::validation(
                        "state.probabilities",
                        format!("sum is {total}, expected 1"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest phonon number carried by the state.
    pub fn max_n0(&self) -> usize {
        match self {
            MechanicalInitState::Pure { amplitudes } => amplitudes.len() - 1,
            MechanicalInitState::Mixed { probabilities } => probabilities.len() - 1,
        }
    }

    /// Indices with non-zero weight.
    pub fn support(&self) -> Vec<usize> {
        match self {
            MechanicalInitState::Pure { amplitudes } => amplitudes
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm_sqr() > 0.0)
                .map(|(n, _)| n)
                .collect(),
            MechanicalInitState::Mixed { probabilities } => probabilities
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .map(|(n, _)| n)
                .collect(),
        }
    }
}

impl Default for MechanicalInitState {
    fn default() -> Self {
        MechanicalInitState::ground()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_model() {
        assert!(ModelParams::new(0.1, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.1, 0.0, -1.0).is_err());
        // 1 + 4 g2 * 2 <= 0
        assert!(ModelParams::new(0.1, -0.125, 0.1).is_err());
        assert!(ModelParams::new(0.1, -0.124, 0.1).is_ok());
        let mut p = ModelParams::new(0.1, 0.0, 0.1).unwrap();
        p.omega_m = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn normalization_limits() {
        let wp = WavepacketParams::new(0.3, 0.3, 0.02).unwrap();
        assert_relative_eq!(normalization_g(&wp), 0.02 / (PI * 2f64.sqrt()), max_relative = 1e-15);
        let far = WavepacketParams::new(-1e6, 1e6, 0.02).unwrap();
        assert_relative_eq!(normalization_g(&far), 0.02 / PI, max_relative = 1e-12);
        // Δ1 = 0, Δ2 = ω_M, ε = 0.01: (1 + 4e-4/(1 + 4e-4))^(-1/2) by hand
        let wp = WavepacketParams::new(0.0, 1.0, 0.01).unwrap();
        let hand = (0.01 / PI) * (1.0 + 4e-4 / 1.0004f64).powf(-0.5);
        assert_relative_eq!(normalization_g(&wp), hand, max_relative = 1e-15);
        assert_eq!(normalization_g(&wp), normalization_g(&wp.swapped()));
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert!(WavepacketParams::new(0.0, 0.0, 0.0).is_err());
        assert!(WavepacketParams::new(0.0, 0.0, -0.1).is_err());
        assert!(WavepacketParams::new(f64::NAN, 0.0, 0.1).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(MechanicalInitState::ground().validate().is_ok());
        let bad = MechanicalInitState::Pure {
            amplitudes: vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)],
        };
        assert!(bad.validate().is_err());
        let mixed = MechanicalInitState::Mixed {
            probabilities: vec![0.5, 0.5],
        };
        assert!(mixed.validate().is_ok());
        let neg = MechanicalInitState::Mixed {
            probabilities: vec![1.5, -0.5],
        };
        assert!(neg.validate().is_err());
        let th = MechanicalInitState::thermal(0.5, 8).unwrap();
        th.validate().unwrap();
        assert_eq!(th.max_n0(), 8);
    }

    #[test]
    fn state_json_shape() {
        let s: MechanicalInitState =
            serde_json::from_str(r#"{"kind":"pure","amplitudes":[[0.6,0.0],[0.0,0.8]]}"#).unwrap();
        s.validate().unwrap();
        assert_eq!(s.support(), vec![0, 1]);
        let m: MechanicalInitState =
            serde_json::from_str(r#"{"kind":"mixed","probabilities":[1.0]}"#).unwrap();
        assert_eq!(m.max_n0(), 0);
    }
}
