use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ModelParams, WavepacketParams};

/// Recurrence time over run length. Emission starts at `t = 0`, so any
/// margin above 1 keeps re-entering photons out of the run; 1.5 also keeps
/// the periodic image of the input tail (`e^{−ε T}`) small.
pub const RECURRENCE_MARGIN: f64 = 1.5;

/// Uniform discretization of the external continuum over `[−K, K]`
/// (detunings from the cavity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathGrid {
    pub n_modes: usize,
    /// Half-bandwidth `K`.
    pub half_width: f64,
}

impl BathGrid {
    pub fn new(n_modes: usize, half_width: f64) -> Result<Self> {
        let b = BathGrid {
            n_modes,
            half_width,
        };
        if n_modes < 3 {
            return Err(Error::validation("oracle.n_modes", "need at least 3 modes"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::validation("oracle.bandwidth", "must be finite and > 0"));
        }
        Ok(b)
    }

    /// Widest band whose recurrence time `2π/dk` is still
    /// `RECURRENCE_MARGIN · t_final`.
    pub fn for_duration(n_modes: usize, t_final: f64) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::validation("oracle.t_final", "must be finite and > 0"));
        }
        Self::new(n_modes, PI * (n_modes - 1).max(1) as f64 / (RECURRENCE_MARGIN * t_final))
    }

    /// Fewest modes (odd) that give half-width `k` with the recurrence
    /// margin kept for `t_final`.
    pub fn modes_for(k: f64, t_final: f64) -> usize {
        let n = (k * RECURRENCE_MARGIN * t_final / PI).ceil() as usize + 1;
        n.max(3) | 1
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_modes - 1) as f64
    }

    pub fn detuning(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n_modes).map(|k| self.detuning(k)).collect()
    }

    /// Time after which the discrete modes rephase.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    /// Per-mode coupling `sqrt(γ_c dk / 2π)`.
    pub fn coupling(&self, params: &ModelParams) -> f64 {
        (params.gamma_c * self.spacing() / (2.0 * PI)).sqrt()
    }

    /// Golden-rule decay rate `2π g² / dk` of the discretized band.
    pub fn golden_rule_rate(&self, params: &ModelParams) -> f64 {
        let g = self.coupling(params);
        2.0 * PI * g * g / self.spacing()
    }

    /// Checks the band against the physical scales it must contain and the
    /// run length against the recurrence time.
    pub fn check(&self, params: &ModelParams, wp: &WavepacketParams, t_final: f64) -> Result<()> {
        let need = 10.0 * params.gamma_c.max(wp.epsilon);
        if self.half_width < need {
            return Err(Error::validation(
                "oracle.bandwidth",
                format!("K = {} below 10·max(γ_c, ε) = {need}", self.half_width),
            ));
        }
        for (name, d) in [("delta1", wp.delta1), ("delta2", wp.delta2)] {
            if d.abs() >= self.half_width {
                return Err(Error::validation(
                    name,
                    format!("input detuning {d} outside the bath band ±{}", self.half_width),
                ));
            }
        }
        if t_final >= self.recurrence_time() {
            return Err(Error::validation(
                "oracle.t_final",
                format!(
                    "t_final = {t_final} reaches the bath recurrence time {}",
                    self.recurrence_time()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rule_reproduces_gamma() {
        let p = ModelParams::new(0.2, 0.01, 0.1).unwrap();
        for (n, k) in [(201, 1.6), (64, 3.0), (1001, 0.7)] {
            let b = BathGrid::new(n, k).unwrap();
            assert!((b.golden_rule_rate(&p) - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_and_recurrence() {
        let b = BathGrid::for_duration(201, 200.0).unwrap();
        assert!((b.recurrence_time() - RECURRENCE_MARGIN * 200.0).abs() < 1e-9);
        let n = BathGrid::modes_for(b.half_width, 200.0);
        assert!(n == 201 || n == 203);
        assert_eq!(b.detuning(0), -b.half_width);
        assert!((b.detuning(200) - b.half_width).abs() < 1e-12);
        assert!((b.detuning(100)).abs() < 1e-12);
    }

    #[test]
    fn checks() {
        let p = ModelParams::new(0.2, 0.01, 0.1).unwrap();
        let wp = WavepacketParams::new(0.0, 0.0, 0.01).unwrap();
        assert!(BathGrid::new(2, 1.0).is_err());
        assert!(BathGrid::new(201, 0.5).unwrap().check(&p, &wp, 10.0).is_err());
        let b = BathGrid::new(201, 1.6).unwrap();
        assert!(b.check(&p, &wp, 200.0).is_ok());
        assert!(b.check(&p, &wp, 500.0).is_err());
    }
}
