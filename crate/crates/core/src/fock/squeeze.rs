use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Squeezing factor of the `m`-photon mechanical eigenbasis,
/// `r_m = ln(4 g2 m / ω_M + 1) / 4`.
pub fn squeeze_factor(m: usize, params: &ModelParams) -> Result<f64> {
    let arg = 4.0 * params.g2 * m as f64 / params.omega_m + 1.0;
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "squeeze factor for m = {m}: log argument {arg} <= 0"
        )));
    }
    Ok(arg.ln() / 4.0)
}

/// Displacement amplitude of the `m`-photon eigenbasis,
/// `α_m = −g1 e^{−3 r_m} m / ω_M`.
pub fn displacement(m: usize, params: &ModelParams) -> Result<f64> {
    let r = squeeze_factor(m, params)?;
    Ok(-params.g1 * (-3.0 * r).exp() * m as f64 / params.omega_m)
}

/// Squeeze and displacement data of the `m`-photon mechanical eigenbasis
/// `|j̃(m)⟩ = S(r_m) D(α_m) |j⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeDisplace {
    pub m: usize,
    pub r: f64,
    pub alpha: f64,
    /// `cosh R`.
    pub mu: f64,
    /// `e^{−iθ} sinh R`.
    pub nu_s: Complex64,
    /// Modulus of the squeeze argument.
    pub big_r: f64,
    /// Phase of the squeeze argument; `0` or `π` for real `r`.
    pub theta: f64,
}

impl SqueezeDisplace {
    pub fn new(m: usize, params: &ModelParams) -> Result<Self> {
        let r = squeeze_factor(m, params)?;
        let alpha = displacement(m, params)?;
        Ok(Self::from_parts(m, r, alpha))
    }

    pub(crate) fn from_parts(m: usize, r: f64, alpha: f64) -> Self {
        let big_r = r.abs();
        let theta = if r < 0.0 { std::f64::consts::PI } else { 0.0 };
        SqueezeDisplace {
            m,
            r,
            alpha,
            mu: big_r.cosh(),
            // e^{−iθ} sinh R with θ ∈ {0, π} is exactly sinh r
            nu_s: Complex64::new(r.sinh(), 0.0),
            big_r,
            theta,
        }
    }

    /// `e^{2 r_m}`, the phonon-energy rescaling in the `m`-photon sector.
    pub fn energy_scale(&self) -> f64 {
        (2.0 * self.r).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(g1: f64, g2: f64) -> ModelParams {
        ModelParams::new(g1, g2, 0.1).unwrap()
    }

    #[test]
    fn squeeze_factor_values() {
        assert_eq!(squeeze_factor(0, &params(0.3, 0.07)).unwrap(), 0.0);
        assert_eq!(squeeze_factor(2, &params(0.3, 0.0)).unwrap(), 0.0);
        let r1 = squeeze_factor(1, &params(0.0, 0.05)).unwrap();
        assert_relative_eq!(r1, 1.2f64.ln() / 4.0, max_relative = 1e-15);
        assert!((r1 - 0.0455803).abs() < 1e-7);
    }

    #[test]
    fn squeeze_factor_domain() {
        let p = ModelParams {
            omega_m: 1.0,
            g1: 0.0,
            g2: -0.3,
            gamma_c: 0.1,
            omega_c: None,
        };
        assert!(matches!(squeeze_factor(1, &p), Err(Error::Domain(_))));
        assert!(matches!(displacement(1, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn displacement_values() {
        assert_eq!(displacement(0, &params(0.7, 0.03)).unwrap(), 0.0);
        assert_relative_eq!(displacement(1, &params(0.5, 0.0)).unwrap(), -0.5);
        let r2 = 1.08f64.ln() / 4.0;
        let hand = -2.0 * 0.2 * (-3.0 * r2).exp();
        assert_relative_eq!(displacement(2, &params(0.2, 0.01)).unwrap(), hand, max_relative = 1e-15);
    }

    #[test]
    fn hyperbolic_identity() {
        for m in 0..=2 {
            let sd = SqueezeDisplace::new(m, &params(0.4, 0.1)).unwrap();
            assert!((sd.mu * sd.mu - sd.nu_s.norm_sqr() - 1.0).abs() < 1e-14);
        }
        let neg = SqueezeDisplace::from_parts(1, -0.2, 0.0);
        assert_eq!(neg.theta, std::f64::consts::PI);
        assert!(neg.nu_s.re < 0.0);
        let zero = SqueezeDisplace::new(0, &params(0.4, 0.1)).unwrap();
        assert_eq!((zero.r, zero.alpha), (0.0, 0.0));
    }
}
