//! Named parameter sets.
//!
//! Each preset fixes the couplings, decay rate and wavepacket width. Plot
//! ranges are not part of the parameter sets, so the grids are chosen to
//! contain every predicted resonance line; fig3–fig5 also leave the input
//! detunings and (fig4–fig5) the mechanical state open. Those assumptions are
//! written into the output metadata.

use crate::config::{AxisSpec, GridSpec, Job, RunConfig};
use crate::error::{Error, Result};
use crate::params::{MechanicalInitState, ModelParams, WavepacketParams};
use crate::spectral::delta_shift;

/// Where the input photons sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDetuning {
    /// `Δ1 = Δ2 = −δ`, on the one-photon resonance.
    MinusDelta,
    /// `Δ1 = Δ2 = 0` (assumed).
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub id: &'static str,
    pub g1: f64,
    pub g2: f64,
    pub gamma_c: f64,
    pub epsilon: f64,
    pub detuning: InputDetuning,
    /// Whether the full 2D spectrum is part of the figure.
    pub grid: bool,
}

const fn fig2(id: &'static str, g1: f64, g2: f64) -> Preset {
    Preset {
        id,
        g1,
        g2,
        gamma_c: 0.1,
        epsilon: 0.01,
        detuning: InputDetuning::MinusDelta,
        grid: true,
    }
}

const fn wide(id: &'static str, g1: f64, g2: f64, gamma_c: f64, grid: bool) -> Preset {
    Preset {
        id,
        g1,
        g2,
        gamma_c,
        epsilon: 2.0,
        detuning: InputDetuning::Zero,
        grid,
    }
}

pub const PRESETS: [Preset; 12] = [
    fig2("fig2a", 0.2, 0.08),
    fig2("fig2b", 0.2, 0.01),
    fig2("fig2c", 0.4, 0.01),
    wide("fig3a", 0.8, 0.01, 0.02, true),
    wide("fig3b", 0.8, 0.05, 0.02, true),
    wide("fig3c", 0.8, 0.10, 0.02, true),
    wide("fig4a", 0.01, 0.05, 0.02, false),
    wide("fig4b", 0.1, 0.05, 0.02, false),
    wide("fig4c", 0.5, 0.05, 0.02, false),
    wide("fig5a", 0.5, 0.02, 0.01, false),
    wide("fig5b", 0.5, 0.02, 0.1, false),
    wide("fig5c", 0.5, 0.02, 0.8, false),
];

pub const NARROW_GRID: AxisSpec = AxisSpec::new(-1.5, 1.5, 401);
/// Around the main peak at `Δp = Δq ≈ −δ` of fig2c.
pub const ZOOM_GRID: AxisSpec = AxisSpec::new(-0.45, 0.15, 241);
/// Step `0.01`, half the narrowest line width (`γ_c = 0.02`) of fig3–fig5.
pub const WIDE_GRID: AxisSpec = AxisSpec::new(-3.0, 3.0, 601);
pub const NARROW_DIAGONAL: AxisSpec = AxisSpec::new(-1.5, 1.5, 1201);
pub const WIDE_DIAGONAL: AxisSpec = AxisSpec::new(-3.0, 3.0, 1201);

pub fn ids() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.id)
}

pub fn find(id: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.id == id).ok_or_else(|| {
        Error::validation(
            "preset",
            format!("unknown preset `{id}` (expected one of {})", ids().collect::<Vec<_>>().join(", ")),
        )
    })
}

impl Preset {
    pub fn model(&self) -> ModelParams {
        ModelParams {
            omega_m: 1.0,
            g1: self.g1,
            g2: self.g2,
            gamma_c: self.gamma_c,
            omega_c: None,
        }
    }

    pub fn wavepacket(&self) -> Result<WavepacketParams> {
        let d = match self.detuning {
            InputDetuning::MinusDelta => -delta_shift(&self.model())?,
            InputDetuning::Zero => 0.0,
        };
        WavepacketParams::new(d, d, self.epsilon)
    }

    /// Full run configuration for this figure panel.
    pub fn config(&self) -> Result<RunConfig> {
        let narrow = self.detuning == InputDetuning::MinusDelta;
        let mut notes = Vec::new();
        if !narrow {
            notes.push("input detunings not fixed by the preset; assumed delta1 = delta2 = 0".to_string());
        }
        if self.id.starts_with("fig4") || self.id.starts_with("fig5") {
            notes.push("mechanical initial state not fixed by the preset; assumed ground state".to_string());
        }
        let mut grids = Vec::new();
        if self.grid {
            grids.push(GridSpec {
                label: "grid".into(),
                p: if narrow { NARROW_GRID } else { WIDE_GRID },
                q: None,
            });
        }
        if self.id == "fig2c" {
            grids.push(GridSpec {
                label: "zoom".into(),
                p: ZOOM_GRID,
                q: None,
            });
        }
        let mut jobs = Vec::new();
        if self.grid {
            jobs.push(Job::Spectrum);
        }
        jobs.extend([Job::Diagonal, Job::Resonances]);
        let cfg = RunConfig {
            preset: Some(self.id.to_string()),
            model: self.model(),
            wavepacket: self.wavepacket()?,
            state: MechanicalInitState::ground(),
            grids,
            diagonal: if narrow { NARROW_DIAGONAL } else { WIDE_DIAGONAL },
            jobs,
            stem: self.id.to_string(),
            notes,
            ..RunConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn config(id: &str) -> Result<RunConfig> {
    find(id)?.config()
}
