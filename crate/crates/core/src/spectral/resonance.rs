use serde::Serialize;

use super::eigen::{delta_shift, nu_shift};
use crate::error::Result;
use crate::fock::squeeze_factor;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    C2,
    C3,
    C4,
}

/// Shape of a resonance line in the `(Δp, Δq)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// `Δq = position`.
    QConst,
    /// `Δp = position`.
    PConst,
    /// `Δp + Δq = position`.
    SumConst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumNumbers {
    pub n0: usize,
    pub j: Option<usize>,
    pub s: Option<usize>,
    pub s_prime: Option<usize>,
}

/// A predicted emission line, where the real part of one of the amplitude
/// denominators vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceLine {
    pub channel: Channel,
    pub quantum_numbers: QuantumNumbers,
    pub geometry: Geometry,
    pub position: f64,
}

impl ResonanceLine {
    /// Euclidean distance from `(p, q)` to the line.
    pub fn distance(&self, p: f64, q: f64) -> f64 {
        match self.geometry {
            Geometry::QConst => (q - self.position).abs(),
            Geometry::PConst => (p - self.position).abs(),
            Geometry::SumConst => (p + q - self.position).abs() / std::f64::consts::SQRT_2,
        }
    }

    /// Distance to the line or to its `Δp ↔ Δq` mirror image.
    pub fn symmetric_distance(&self, p: f64, q: f64) -> f64 {
        self.distance(p, q).min(self.distance(q, p))
    }
}

/// Enumerates all lines for initial phonon number `n0`, final phonons
/// `j ≤ j_max` and intermediate indices `≤ s_max`:
///
/// * C2, C3: `Δq = s ω_M e^{2r_1} − j ω_M − δ` (C3 also in `Δp`);
/// * C4: `Δp = s′ ω_M e^{2r_2} − s ω_M e^{2r_1} + δ − ν` and
///   `Δp + Δq = s′ ω_M e^{2r_2} − j ω_M − ν`.
pub fn resonance_lines(
    params: &ModelParams,
    n0: usize,
    j_max: usize,
    s_max: usize,
) -> Result<Vec<ResonanceLine>> {
    let w = params.omega_m;
    let w1 = w * (2.0 * squeeze_factor(1, params)?).exp();
    let w2 = w * (2.0 * squeeze_factor(2, params)?).exp();
    let delta = delta_shift(params)?;
    let nu = nu_shift(params)?;
    let qn = |j, s, s_prime| QuantumNumbers {
        n0,
        j,
        s,
        s_prime,
    };

    let mut lines = Vec::new();
    for j in 0..=j_max {
        for s in 0..=s_max {
            let position = s as f64 * w1 - j as f64 * w - delta;
            let numbers = qn(Some(j), Some(s), None);
            for (channel, geometry) in [
                (Channel::C2, Geometry::QConst),
                (Channel::C3, Geometry::QConst),
                (Channel::C3, Geometry::PConst),
            ] {
                lines.push(ResonanceLine {
                    channel,
                    quantum_numbers: numbers,
                    geometry,
                    position,
                });
            }
        }
        for sp in 0..=s_max {
            lines.push(ResonanceLine {
                channel: Channel::C4,
                quantum_numbers: qn(Some(j), None, Some(sp)),
                geometry: Geometry::SumConst,
                position: sp as f64 * w2 - j as f64 * w - nu,
            });
        }
    }
    for s in 0..=s_max {
        for sp in 0..=s_max {
            lines.push(ResonanceLine {
                channel: Channel::C4,
                quantum_numbers: qn(None, Some(s), Some(sp)),
                geometry: Geometry::PConst,
                position: sp as f64 * w2 - s as f64 * w1 + delta - nu,
            });
        }
    }
    Ok(lines)
}

/// Line closest to `(p, q)` (mirror images included) and its distance.
pub fn nearest_line(lines: &[ResonanceLine], p: f64, q: f64) -> Option<(&ResonanceLine, f64)> {
    lines
        .iter()
        .map(|l| (l, l.symmetric_distance(p, q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}
