use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bath::BathGrid;
use super::evolve::{default_dt, evolve, EvolveOptions};
use super::state::{initialize, OracleState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::{MechanicalInitState, ModelParams, WavepacketParams};
use crate::spectral::{spectrum_grid, ScatteringModel, SpectrumGrid, SpectrumMeta, TruncationRecord};

/// Settings for one oracle run and its comparison against the analytic
/// spectrum. `None` fields are derived from the physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub n_modes: Option<usize>,
    pub bandwidth: Option<f64>,
    /// Phonon levels kept in every sector.
    pub n_b: usize,
    pub t_final: Option<f64>,
    /// Free propagation before the pulse front reaches the cavity; the run
    /// starts at `−lead_time`. Defaults to `LEAD_WIDTHS · π/K`.
    pub lead_time: Option<f64>,
    pub dt: Option<f64>,
    /// Fraction of the continuum wavepacket norm the band must hold.
    pub min_norm_fraction: f64,
    pub norm_tolerance: f64,
    /// Largest intracavity population accepted at `t_final`.
    pub residual_tolerance: f64,
    pub bins: usize,
    /// Comparison window `[lo, hi]` on both axes; defaults to the band.
    pub window: Option<(f64, f64)>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_modes: None,
            bandwidth: None,
            n_b: 6,
            t_final: None,
            lead_time: None,
            dt: None,
            min_norm_fraction: 0.99,
            norm_tolerance: 1e-8,
            residual_tolerance: 1e-4,
            bins: 41,
            window: None,
        }
    }
}

pub const DEFAULT_MODES: usize = 201;

/// Default lead time in units of the band-limited front width `π/K`.
pub const LEAD_WIDTHS: f64 = 10.0;

impl OracleConfig {
    /// `max(20/γ_c, 10/ε)`: the emitted amplitude near resonance converges
    /// like `e^{−ε t}` (the input tail still arriving), the cavity like
    /// `e^{−γ_c t/2}`.
    pub fn default_t_final(params: &ModelParams, wp: &WavepacketParams) -> f64 {
        (20.0 / params.gamma_c).max(10.0 / wp.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_b == 0 {
            return Err(Error::validation("oracle.n_b", "must be >= 1"));
        }
        if self.bins < 2 {
            return Err(Error::validation("oracle.bins", "must be >= 2"));
        }
        for (name, v) in [
            ("oracle.min_norm_fraction", self.min_norm_fraction),
            ("oracle.norm_tolerance", self.norm_tolerance),
            ("oracle.residual_tolerance", self.residual_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, "must be finite and > 0"));
            }
        }
        if self.min_norm_fraction > 1.0 {
            return Err(Error::validation("oracle.min_norm_fraction", "must be <= 1"));
        }
        if let Some(lead) = self.lead_time {
            if !(lead.is_finite() && lead >= 0.0) {
                return Err(Error::validation("oracle.lead_time", "must be finite and >= 0"));
            }
        }
        if let Some((lo, hi)) = self.window {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation("oracle.window", "need finite lo < hi"));
            }
        }
        Ok(())
    }

    /// Resolves run length and bath. Without explicit values the band is
    /// the widest whose recurrence time keeps the margin over `t_final`, with enough modes to
    /// reach `10·max(γ_c, ε)` and to hold `min_norm_fraction` of the input.
    pub fn resolve(&self, params: &ModelParams, wp: &WavepacketParams) -> Result<(f64, BathGrid)> {
        self.validate()?;
        let t_final = self.t_final.unwrap_or_else(|| Self::default_t_final(params, wp));
        // Each Lorentzian leaves about 2ε/(πK) of its weight outside ±K.
        let tails = 4.0 * wp.epsilon / (std::f64::consts::PI * (1.0 - self.min_norm_fraction));
        let need = (10.0 * params.gamma_c.max(wp.epsilon)).max(1.1 * tails);
        let bath = match (self.n_modes, self.bandwidth) {
            (Some(n), Some(k)) => BathGrid::new(n, k)?,
            (Some(n), None) => BathGrid::for_duration(n, t_final)?,
            (None, Some(k)) => BathGrid::new(BathGrid::modes_for(k, t_final), k)?,
            (None, None) => {
                let n = DEFAULT_MODES.max(BathGrid::modes_for(need, t_final));
                BathGrid::for_duration(n, t_final)?
            }
        };
        bath.check(params, wp, t_final + self.lead(&bath))?;
        Ok((t_final, bath))
    }

    pub fn lead(&self, bath: &BathGrid) -> f64 {
        self.lead_time
            .unwrap_or(LEAD_WIDTHS * std::f64::consts::PI / bath.half_width)
    }
}

/// Outcome of an oracle-vs-analytic comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `‖S_oracle − S_analytic‖₂ / ‖S_analytic‖₂` over the bins.
    pub l2_relative: f64,
    /// `max |S_oracle − S_analytic| / max S_analytic` over the bins.
    pub linf_relative: f64,
    pub residual: f64,
    pub residual_ok: bool,
    pub norm_drift: f64,
    /// Discrete norm of the input before rescaling; the oracle density is
    /// multiplied by it so both sides describe the same band-limited input.
    pub initial_norm: f64,
    /// `max |S(p,q) − S(q,p)| / max S` of the binned oracle spectrum; the
    /// stored pairs are symmetric by construction, so only rounding shows.
    pub symmetry_defect: f64,
    pub t_final: f64,
    pub lead_time: f64,
    pub dt: f64,
    pub bath: BathGrid,
    pub n_b: usize,
    pub bins: usize,
    pub window: (f64, f64),
    pub config: OracleConfig,
}

/// Result of [`run_comparison`].
#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub oracle: SpectrumGrid,
    pub analytic: SpectrumGrid,
}

/// Mode-resolved density `Σ_j |C_j(Δp, Δq)|²` scaled by `weight`, full
/// square layout.
fn mode_density(states: &[(f64, OracleState)], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for (weight, st) in states {
        let scale = weight * st.initial_norm;
        for p in 0..n {
            for q in 0..=p {
                let d = scale * st.density(p, q);
                out[p * n + q] += d;
                if p != q {
                    out[q * n + p] += d;
                }
            }
        }
    }
    out
}

struct Binning {
    edges_lo: f64,
    width: f64,
    bins: usize,
    members: Vec<usize>, // bin index per mode, usize::MAX if outside
}

impl Binning {
    fn new(detunings: &[f64], window: (f64, f64), bins: usize) -> Self {
        let width = (window.1 - window.0) / bins as f64;
        let members = detunings
            .iter()
            .map(|&d| {
                if d < window.0 || d > window.1 {
                    usize::MAX
                } else {
                    (((d - window.0) / width) as usize).min(bins - 1)
                }
            })
            .collect();
        Binning {
            edges_lo: window.0,
            width,
            bins,
            members,
        }
    }

    fn centers(&self) -> Vec<f64> {
        (0..self.bins)
            .map(|b| self.edges_lo + (b as f64 + 0.5) * self.width)
            .collect()
    }

    /// Averages a square mode-resolved field into bins; empty bins are 0.
    fn average(&self, field: &[f64], n: usize) -> Vec<f64> {
        let nb = self.bins;
        let mut sum = vec![0.0; nb * nb];
        let mut count = vec![0usize; nb * nb];
        for p in 0..n {
            let bp = self.members[p];
            if bp == usize::MAX {
                continue;
            }
            for q in 0..n {
                let bq = self.members[q];
                if bq == usize::MAX {
                    continue;
                }
                sum[bp * nb + bq] += field[p * n + q];
                count[bp * nb + bq] += 1;
            }
        }
        sum.iter()
            .zip(&count)
            .map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
            .collect()
    }
}

/// Bins the final two-photon density of one or more runs onto a
/// `bins × bins` grid of averages over the modes in each cell.
pub fn extract_spectrum(
    states: &[(f64, OracleState)],
    bins: usize,
    window: (f64, f64),
    meta: SpectrumMeta,
) -> SpectrumGrid {
    let bath = *states[0].1.bath();
    let n = bath.n_modes;
    let binning = Binning::new(&bath.detunings(), window, bins);
    let density = mode_density(states, n);
    let axis = binning.centers();
    SpectrumGrid {
        p_axis: axis.clone(),
        q_axis: axis,
        values: binning.average(&density, n),
        meta,
    }
}

/// Runs the oracle for `state` (one run per populated `n0` for mixed
/// states, a single coherent run for pure states) and compares the binned
/// spectrum with the analytic one at the same mode points.
pub fn run_comparison(
    model: &ScatteringModel,
    state: &MechanicalInitState,
    cfg: &OracleConfig,
    exec: Execution,
) -> Result<Comparison> {
    state.validate()?;
    let params = *model.params();
    let wp = *model.wavepacket();
    let (t_final, bath) = cfg.resolve(&params, &wp)?;
    let table = model.table();
    let n_b = cfg.n_b;
    if let Some(&top) = state.support().last() {
        if top >= n_b {
            return Err(Error::Range {
                what: "initial phonon number in oracle basis (raise n_b)",
                index: top,
                max: n_b - 1,
            });
        }
    }
    if table.max_index() + 1 < n_b {
        return Err(Error::validation(
            "oracle.n_b",
            format!("exceeds the FC table size {}", table.max_index() + 1),
        ));
    }

    let initial: Vec<(f64, OracleState)> = match state {
        MechanicalInitState::Pure { amplitudes } => {
            vec![(1.0, superpose(&wp, amplitudes, n_b, &bath, cfg.min_norm_fraction)?)]
        }
        MechanicalInitState::Mixed { probabilities } => state
            .support()
            .into_iter()
            .map(|n0| Ok((probabilities[n0], initialize(&wp, n0, n_b, &bath, cfg.min_norm_fraction)?)))
            .collect::<Result<_>>()?,
    };

    let lead = cfg.lead(&bath);
    let mut initial = initial;
    for (_, s) in initial.iter_mut() {
        s.rewind(lead, params.omega_m)?;
    }

    let dt = match cfg.dt {
        Some(dt) => dt,
        None => default_dt(&initial[0].1, table)?,
    };
    let opts = EvolveOptions {
        t_final,
        dt,
        norm_tolerance: cfg.norm_tolerance,
        check_every: 50,
    };
    let mut finals = Vec::with_capacity(initial.len());
    let mut residual = 0.0;
    let mut drift: f64 = 0.0;
    for (w, s0) in &initial {
        log::info!(
            "oracle run: {} modes, K = {:.4}, n_b = {n_b}, t = {t_final}, dt = {dt:.4e}",
            bath.n_modes,
            bath.half_width
        );
        let s1 = evolve(s0, table, &opts, exec)?;
        residual += w * s1.intracavity();
        drift = drift.max((s1.norm_sqr() - s0.norm_sqr()).abs());
        finals.push((*w, s1));
    }

    let window = cfg.window.unwrap_or((-bath.half_width, bath.half_width));
    let mut meta = SpectrumMeta {
        source: "time-domain".into(),
        model: params,
        wavepacket: wp,
        state: state.clone(),
        truncation: TruncationRecord::unchecked(*model.truncation()),
        notes: vec![format!(
            "bath: {} modes on [-{K}, {K}], n_b = {n_b}, t from -{lead} to {t_final}, dt = {dt}",
            bath.n_modes,
            K = bath.half_width
        )],
    };
    let oracle = extract_spectrum(&finals, cfg.bins, window, meta.clone());

    let det = bath.detunings();
    let analytic_modes = spectrum_grid(model, state, &det, &det, exec)?;
    let binning = Binning::new(&det, window, cfg.bins);
    meta.source = "analytic".into();
    let analytic = SpectrumGrid {
        p_axis: oracle.p_axis.clone(),
        q_axis: oracle.q_axis.clone(),
        values: binning.average(&analytic_modes.values, bath.n_modes),
        meta,
    };

    let (mut num, mut den, mut worst, mut peak) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (o, a) in oracle.values.iter().zip(&analytic.values) {
        num += (o - a) * (o - a);
        den += a * a;
        worst = worst.max((o - a).abs());
        peak = peak.max(*a);
    }
    let nb = cfg.bins;
    let mut symmetry_defect: f64 = 0.0;
    for i in 0..nb {
        for k in 0..nb {
            symmetry_defect = symmetry_defect.max((oracle.get(i, k) - oracle.get(k, i)).abs());
        }
    }
    let report = ComparisonReport {
        l2_relative: (num / den).sqrt(),
        linf_relative: worst / peak,
        residual,
        residual_ok: residual < cfg.residual_tolerance,
        norm_drift: drift,
        initial_norm: initial.iter().map(|(w, s)| w * s.initial_norm).sum(),
        symmetry_defect: symmetry_defect / oracle.max(),
        t_final,
        lead_time: lead,
        dt,
        bath,
        n_b,
        bins: nb,
        window,
        config: *cfg,
    };
    Ok(Comparison {
        report,
        oracle,
        analytic,
    })
}

/// Pure mechanical superposition `Σ c_n0 |n0⟩` times the two-photon input.
fn superpose(
    wp: &WavepacketParams,
    amplitudes: &[Complex64],
    n_b: usize,
    bath: &BathGrid,
    min_fraction: f64,
) -> Result<OracleState> {
    let mut out: Option<OracleState> = None;
    for (n0, &c) in amplitudes.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let s = initialize(wp, n0, n_b, bath, min_fraction)?;
        match out.as_mut() {
            None => {
                let mut s = s;
                s.data.iter_mut().for_each(|x| *x *= c);
                out = Some(s);
            }
            Some(acc) => {
                for (a, x) in acc.data.iter_mut().zip(&s.data) {
                    *a += c * x;
                }
            }
        }
    }
    out.ok_or_else(|| Error::validation("state.amplitudes", "all amplitudes are zero"))
}
