use num_complex::Complex64;
use serde::Serialize;

use super::amplitude::{check_finite, Scratch, ScatteringModel, Truncation};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::MAX_FOCK_INDEX;
use crate::params::{MechanicalInitState, ModelParams, WavepacketParams};

/// How the cutoffs used for a spectrum were arrived at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRecord {
    pub requested: Truncation,
    pub used: Truncation,
    pub doublings: usize,
    /// Largest change seen between `used` and its doubling, relative to the
    /// largest probed value; `None` if no check was run.
    pub achieved: Option<f64>,
    pub probe_points: usize,
}

impl TruncationRecord {
    pub fn unchecked(trunc: Truncation) -> Self {
        TruncationRecord {
            requested: trunc,
            used: trunc,
            doublings: 0,
            achieved: None,
            probe_points: 0,
        }
    }
}

/// Provenance attached to every grid or cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMeta {
    /// `"analytic"` or `"time-domain"`.
    pub source: String,
    pub model: ModelParams,
    pub wavepacket: WavepacketParams,
    pub state: MechanicalInitState,
    pub truncation: TruncationRecord,
    /// Free-form assumptions, e.g. detunings not fixed by a preset.
    pub notes: Vec<String>,
}

/// `S(Δp, Δq)` on a rectangular grid, row-major in `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumGrid {
    pub p_axis: Vec<f64>,
    pub q_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumGrid {
    pub fn get(&self, ip: usize, iq: usize) -> f64 {
        self.values[ip * self.q_axis.len() + iq]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p_axis.len(), self.q_axis.len())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `S(Δ, Δ)` along the main diagonal; requires identical axes.
    pub fn diagonal(&self) -> Option<DiagonalCut> {
        if self.p_axis != self.q_axis {
            return None;
        }
        let n = self.p_axis.len();
        Some(DiagonalCut {
            axis: self.p_axis.clone(),
            values: (0..n).map(|i| self.get(i, i)).collect(),
            meta: self.meta.clone(),
        })
    }
}

/// `S(Δ, Δ)` sampled along an axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalCut {
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SpectrumMeta,
}

/// Initial-state weights restricted to their support.
enum Weights {
    Pure(Vec<(usize, Complex64)>),
    Mixed(Vec<(usize, f64)>),
}

impl Weights {
    fn new(state: &MechanicalInitState, trunc: &Truncation) -> Result<Self> {
        state.validate()?;
        let support = state.support();
        if let Some(&n) = support.last() {
            if n > trunc.n0_max {
                return Err(Error::Range {
                    what: "initial-state phonon number (raise n0_max)",
                    index: n,
                    max: trunc.n0_max,
                });
            }
        }
        Ok(match state {
            MechanicalInitState::Pure { amplitudes } => {
                Weights::Pure(support.into_iter().map(|n| (n, amplitudes[n])).collect())
            }
            MechanicalInitState::Mixed { probabilities } => {
                Weights::Mixed(support.into_iter().map(|n| (n, probabilities[n])).collect())
            }
        })
    }
}

/// Reusable per-thread evaluation state.
struct Evaluator<'a> {
    model: &'a ScatteringModel,
    weights: &'a Weights,
    scratch: Scratch,
    amps: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a ScatteringModel, weights: &'a Weights) -> Self {
        let nj = model.truncation().j_max + 1;
        Evaluator {
            model,
            weights,
            scratch: Scratch::default(),
            amps: vec![Complex64::new(0.0, 0.0); nj],
            acc: vec![Complex64::new(0.0, 0.0); nj],
        }
    }

    fn eval(&mut self, dp: f64, dq: f64) -> f64 {
        match self.weights {
            // Σ_j |Σ_n0 c_n0 C_{n0,j}|²
            Weights::Pure(w) => {
                self.acc.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                for &(n0, c) in w {
                    self.model
                        .amplitudes_into(n0, dp, dq, &mut self.amps, &mut self.scratch);
                    for (a, x) in self.acc.iter_mut().zip(&self.amps) {
                        *a += c * x;
                    }
                }
                self.acc.iter().map(|a| a.norm_sqr()).sum()
            }
            // Σ_j Σ_n0 P_n0 |C_{n0,j}|²
            Weights::Mixed(w) => {
                let mut s = 0.0;
                for &(n0, p) in w {
                    self.model
                        .amplitudes_into(n0, dp, dq, &mut self.amps, &mut self.scratch);
                    s += p * self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
                }
                s
            }
        }
    }
}

fn meta(model: &ScatteringModel, state: &MechanicalInitState) -> SpectrumMeta {
    SpectrumMeta {
        source: "analytic".into(),
        model: *model.params(),
        wavepacket: *model.wavepacket(),
        state: state.clone(),
        truncation: TruncationRecord::unchecked(*model.truncation()),
        notes: Vec::new(),
    }
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::validation(name, "axis must not be empty"));
    }
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(name, "axis values must be finite"));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(name, "axis must be strictly increasing"));
    }
    Ok(())
}

/// Joint spectrum `S(Δp, Δq)` at a single point.
pub fn spectrum_point(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    dp: f64,
    dq: f64,
) -> Result<f64> {
    check_finite(dp, dq)?;
    let weights = Weights::new(state, model.truncation())?;
    Ok(Evaluator::new(model, &weights).eval(dp, dq))
}

/// `S` on the Cartesian product of two axes.
///
/// With identical axes only the upper triangle is evaluated and mirrored,
/// so the result is exactly symmetric.
pub fn spectrum_grid(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    p_axis: &[f64],
    q_axis: &[f64],
    exec: Execution,
) -> Result<SpectrumGrid> {
    check_axis("p_axis", p_axis)?;
    check_axis("q_axis", q_axis)?;
    let weights = Weights::new(state, model.truncation())?;
    let (np, nq) = (p_axis.len(), q_axis.len());
    let square = p_axis == q_axis;

    let rows = exec.map_indices(np, |i| {
        let mut ev = Evaluator::new(model, &weights);
        let start = if square { i } else { 0 };
        (start..nq)
            .map(|k| ev.eval(p_axis[i], q_axis[k]))
            .collect::<Vec<f64>>()
    });

    let mut values = vec![0.0; np * nq];
    for (i, row) in rows.into_iter().enumerate() {
        let start = if square { i } else { 0 };
        for (off, v) in row.into_iter().enumerate() {
            let k = start + off;
            values[i * nq + k] = v;
            if square {
                values[k * nq + i] = v;
            }
        }
    }
    Ok(SpectrumGrid {
        p_axis: p_axis.to_vec(),
        q_axis: q_axis.to_vec(),
        values,
        meta: meta(model, state),
    })
}

/// `S(Δ, Δ)` along `axis`.
pub fn diagonal_spectrum(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    axis: &[f64],
    exec: Execution,
) -> Result<DiagonalCut> {
    check_axis("axis", axis)?;
    let weights = Weights::new(state, model.truncation())?;
    let chunk = 16;
    let chunks = exec.map_indices(axis.len().div_ceil(chunk), |c| {
        let mut ev = Evaluator::new(model, &weights);
        axis[c * chunk..((c + 1) * chunk).min(axis.len())]
            .iter()
            .map(|&d| ev.eval(d, d))
            .collect::<Vec<f64>>()
    });
    Ok(DiagonalCut {
        axis: axis.to_vec(),
        values: chunks.into_iter().flatten().collect(),
        meta: meta(model, state),
    })
}

/// Corners, centre and quarter points of the diagonal and anti-diagonal.
pub fn probe_points(p_axis: &[f64], q_axis: &[f64]) -> Vec<(f64, f64)> {
    let at = |axis: &[f64], f: f64| {
        let (lo, hi) = (axis[0], axis[axis.len() - 1]);
        lo + f * (hi - lo)
    };
    let mut pts = Vec::new();
    for fp in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for fq in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let on_diag = fp == fq || fp + fq == 1.0;
            if on_diag {
                pts.push((at(p_axis, fp), at(q_axis, fq)));
            }
        }
    }
    pts
}

/// Maximum change in `S` between `model` and its doubled cutoffs over the
/// probes, relative to the largest probed value.
pub fn truncation_change(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    probes: &[(f64, f64)],
    exec: Execution,
) -> Result<f64> {
    let fine = model.with_truncation(model.truncation().doubled())?;
    let pairs = exec.map_indices(probes.len(), |i| {
        let (p, q) = probes[i];
        Ok((spectrum_point(model, state, p, q)?, spectrum_point(&fine, state, p, q)?))
    });
    let pairs = pairs.into_iter().collect::<Result<Vec<(f64, f64)>>>()?;
    let scale = pairs.iter().map(|x| x.1).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
}

/// Doubles the cutoffs of `model` until the probed spectrum moves by less
/// than the truncation tolerance.
pub fn converge_truncation(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    probes: &[(f64, f64)],
    exec: Execution,
) -> Result<(ScatteringModel, TruncationRecord)> {
    let requested = *model.truncation();
    let mut current = model.clone();
    let mut doublings = 0;
    loop {
        let change = truncation_change(&current, state, probes, exec)?;
        log::debug!(
            "truncation j_max={} s_max={}: relative change {change:.3e}",
            current.truncation().j_max,
            current.truncation().s_max
        );
        if change <= requested.tolerance {
            let record = TruncationRecord {
                requested,
                used: *current.truncation(),
                doublings,
                achieved: Some(change),
                probe_points: probes.len(),
            };
            return Ok((current, record));
        }
        let next = current.truncation().doubled();
        if next.doubled().table_size() > MAX_FOCK_INDEX {
            return Err(Error::Convergence {
                what: format!(
                    "Fock truncation (stopped at j_max={}, s_max={})",
                    next.j_max, next.s_max
                ),
                achieved: change,
                tolerance: requested.tolerance,
            });
        }
        current = current.with_truncation(next)?;
        doublings += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ScatteringModel {
        let p = ModelParams::new(0.4, 0.05, 0.1).unwrap();
        let wp = WavepacketParams::new(-0.1, 0.05, 0.3).unwrap();
        ScatteringModel::new(&p, &wp, Truncation::default()).unwrap()
    }

    #[test]
    fn pure_ground_equals_mixed_ground() {
        let m = model();
        let mixed = MechanicalInitState::Mixed {
            probabilities: vec![1.0],
        };
        for (p, q) in [(0.0, 0.0), (0.3, -0.7), (-1.2, 0.4)] {
            let a = spectrum_point(&m, &MechanicalInitState::ground(), p, q).unwrap();
            let b = spectrum_point(&m, &mixed, p, q).unwrap();
            assert!((a - b).abs() <= 1e-14 * a);
            assert!(a >= 0.0);
        }
    }

    #[test]
    fn grid_is_mirror_symmetric_and_matches_points() {
        let m = model();
        let axis: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let st = MechanicalInitState::ground();
        let g = spectrum_grid(&m, &st, &axis, &axis, Execution::Parallel).unwrap();
        for i in 0..9 {
            for k in 0..9 {
                assert_eq!(g.get(i, k), g.get(k, i));
            }
        }
        let direct = spectrum_point(&m, &st, axis[2], axis[7]).unwrap();
        assert_eq!(g.get(2, 7), direct);
        let d = diagonal_spectrum(&m, &st, &axis, Execution::Sequential).unwrap();
        assert_eq!(d.values, g.diagonal().unwrap().values);
    }

    #[test]
    fn rectangular_grid() {
        let m = model();
        let st = MechanicalInitState::ground();
        let g = spectrum_grid(&m, &st, &[-0.5, 0.0, 0.5], &[-0.2, 0.1], Execution::Sequential)
            .unwrap();
        assert_eq!(g.shape(), (3, 2));
        assert_eq!(g.get(2, 1), spectrum_point(&m, &st, 0.5, 0.1).unwrap());
        assert!(g.diagonal().is_none());
    }

    #[test]
    fn axis_validation() {
        let m = model();
        let st = MechanicalInitState::ground();
        assert!(spectrum_grid(&m, &st, &[0.0, 0.0], &[0.0], Execution::Sequential).is_err());
        assert!(diagonal_spectrum(&m, &st, &[], Execution::Sequential).is_err());
        let excited = MechanicalInitState::number(9);
        assert!(matches!(
            spectrum_point(&m, &excited, 0.0, 0.0),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn convergence_record() {
        let m = model();
        let axis = [-2.0, 2.0];
        let (used, rec) =
            converge_truncation(&m, &MechanicalInitState::ground(), &probe_points(&axis, &axis), Execution::Parallel)
                .unwrap();
        assert!(rec.achieved.unwrap() <= m.truncation().tolerance);
        assert_eq!(used.truncation(), &rec.used);
        assert_eq!(rec.probe_points, 9);
    }
}
