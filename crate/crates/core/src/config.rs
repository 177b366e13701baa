//! JSON run configuration.
//!
//! Every field has a default, so `{}` is a valid configuration. Validation
//! runs before any computation and reports the offending field by its JSON
//! path.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracle::OracleConfig;
use crate::params::{MechanicalInitState, ModelParams, WavepacketParams};
use crate::spectral::Truncation;

/// Evenly spaced detuning axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    pub const fn new(min: f64, max: f64, points: usize) -> Self {
        AxisSpec { min, max, points }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::validation(field, "need finite min < max"));
        }
        if self.points < 2 {
            return Err(Error::validation(format!("{field}.points"), "must be >= 2"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

/// A 2D grid; `q` defaults to the `p` axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Used in output file names.
    pub label: String,
    pub p: AxisSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<AxisSpec>,
}

impl GridSpec {
    pub fn q_axis(&self) -> AxisSpec {
        self.q.unwrap_or(self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Job {
    Spectrum,
    Diagonal,
    Resonances,
    FcTable,
    OracleCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceSpec {
    pub j_max: usize,
    pub s_max: usize,
}

impl Default for ResonanceSpec {
    fn default() -> Self {
        ResonanceSpec { j_max: 4, s_max: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub model: ModelParams,
    pub wavepacket: WavepacketParams,
    pub state: MechanicalInitState,
    pub truncation: Truncation,
    /// Double the cutoffs until probe points settle before the full sweep.
    pub check_truncation: bool,
    pub grids: Vec<GridSpec>,
    pub diagonal: AxisSpec,
    pub resonances: ResonanceSpec,
    pub oracle: OracleConfig,
    pub jobs: Vec<Job>,
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Prefix of every output file name.
    pub stem: String,
    /// Assumptions not fixed by the physical parameters.
    pub notes: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: None,
            model: ModelParams {
                omega_m: 1.0,
                g1: 0.2,
                g2: 0.01,
                gamma_c: 0.1,
                omega_c: None,
            },
            wavepacket: WavepacketParams {
                delta1: 0.0,
                delta2: 0.0,
                epsilon: 0.1,
            },
            state: MechanicalInitState::ground(),
            truncation: Truncation::default(),
            check_truncation: true,
            grids: vec![GridSpec {
                label: "grid".into(),
                p: AxisSpec::new(-1.5, 1.5, 121),
                q: None,
            }],
            diagonal: AxisSpec::new(-1.5, 1.5, 601),
            resonances: ResonanceSpec::default(),
            oracle: OracleConfig::default(),
            jobs: vec![Job::Spectrum],
            out: None,
            stem: "run".into(),
            notes: Vec::new(),
        }
    }
}

fn within(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::Validation { field, message } => Error::Validation {
            field: format!("{section}.{field}"),
            message,
        },
        other => other,
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        // malformed or unknown fields are a user error, not an I/O failure
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::validation("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// An unreadable file is a validation error on `config`, like a
    /// malformed one.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        within("model", self.model.validate())?;
        within("wavepacket", self.wavepacket.validate())?;
        self.state.validate()?;
        self.truncation.validate()?;
        if self.state.max_n0() > self.truncation.n0_max {
            return Err(Error::validation(
                "state",
                format!(
                    "initial phonon support reaches n0 = {}, above truncation.n0_max = {}",
                    self.state.max_n0(),
                    self.truncation.n0_max
                ),
            ));
        }
        if self.jobs.contains(&Job::Spectrum) && self.grids.is_empty() {
            return Err(Error::validation("grids", "spectrum job needs at least one grid"));
        }
        for (i, g) in self.grids.iter().enumerate() {
            g.p.validate(&format!("grids[{i}].p"))?;
            if let Some(q) = &g.q {
                q.validate(&format!("grids[{i}].q"))?;
            }
            let ok = !g.label.is_empty()
                && g.label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !ok {
                return Err(Error::validation(
                    format!("grids[{i}].label"),
                    "must be non-empty [A-Za-z0-9_-]",
                ));
            }
        }
        self.diagonal.validate("diagonal")?;
        if self.stem.is_empty() || self.stem.contains(['/', '\\']) {
            return Err(Error::validation("stem", "must be a non-empty file name"));
        }
        if self.jobs.contains(&Job::OracleCompare) {
            self.oracle.validate()?;
            if self.oracle.n_b > self.truncation.table_size() + 1 {
                return Err(Error::validation(
                    "oracle.n_b",
                    "exceeds the Fock range covered by the truncation",
                ));
            }
        }
        Ok(())
    }

    /// Overwrites one scalar physical parameter by name.
    pub fn set_scalar(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "omega_m" => self.model.omega_m = value,
            "g1" => self.model.g1 = value,
            "g2" => self.model.g2 = value,
            "gamma_c" => self.model.gamma_c = value,
            "delta1" => self.wavepacket.delta1 = value,
            "delta2" => self.wavepacket.delta2 = value,
            "epsilon" => self.wavepacket.epsilon = value,
            _ => {
                return Err(Error::validation(
                    "param",
                    format!(
                        "unknown sweep parameter `{name}` (expected one of {})",
                        SWEEP_PARAMS.join(", ")
                    ),
                ))
            }
        }
        Ok(())
    }
}

pub const SWEEP_PARAMS: [&str; 7] = ["omega_m", "g1", "g2", "gamma_c", "delta1", "delta2", "epsilon"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            jobs: vec![Job::Diagonal, Job::FcTable],
            state: MechanicalInitState::thermal(0.3, 4).unwrap(),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn field_level_errors() {
        let e = RunConfig::from_json(r#"{"wavepacket": {"delta1": 0, "delta2": 0, "epsilon": -1}}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "wavepacket.epsilon"), "{e}");
        let e = RunConfig::from_json(r#"{"grids": [{"label": "a", "p": {"min": 1, "max": 0, "points": 5}}]}"#)
            .unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "grids[0].p"), "{e}");
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn axis_endpoints_exact() {
        let a = AxisSpec::new(-3.0, 3.0, 301).values();
        assert_eq!(a.len(), 301);
        assert_eq!(a[0], -3.0);
        assert_eq!(a[300], 3.0);
        assert!(a[150].abs() < 1e-15);
    }
}
