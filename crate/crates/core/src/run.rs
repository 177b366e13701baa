//! Executes the jobs of a [`RunConfig`] and writes their outputs.

use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::{Job, RunConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::export::{write_diagonal_csv, write_fc_csv, write_grid_csv, write_json, Document, SCHEMA_VERSION};
use crate::oracle::{run_comparison, ComparisonReport};
use crate::spectral::peaks::{
    dominance, local_maxima_2d, ridge, sidebands, significant, subpeaks, DominanceReport, Peak2,
    RidgeReport, SidebandReport, SubpeakReport,
};
use crate::spectral::{
    converge_truncation, diagonal_spectrum, probe_points, resonance_lines, spectrum_grid,
    DiagonalCut, ResonanceLine, ScatteringModel, SpectrumGrid, TruncationRecord,
};

/// Maxima below this fraction of the global maximum are not reported.
pub const PEAK_FRACTION: f64 = 0.05;
/// A secondary maximum above this fraction breaks single-peak dominance.
pub const DOMINANCE_FRACTION: f64 = 0.10;

/// Machine-readable description of a failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub schema_version: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport {
            schema_version: SCHEMA_VERSION,
            kind: e.kind(),
            exit_code: e.exit_code(),
            field: match e {
                Error::Validation { field, .. } => Some(field.clone()),
                _ => None,
            },
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridAnalysis {
    pub maxima: Vec<Peak2>,
    pub dominance: DominanceReport,
    pub ridge: Option<RidgeReport>,
}

impl GridAnalysis {
    pub fn new(grid: &SpectrumGrid) -> Self {
        let peaks = local_maxima_2d(grid);
        GridAnalysis {
            maxima: significant(&peaks, |p| p.value, grid.max(), PEAK_FRACTION),
            dominance: dominance(grid, DOMINANCE_FRACTION),
            ridge: ridge(grid),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalAnalysis {
    pub sidebands: SidebandReport,
    /// Dips are listed but not used to decide resolution.
    pub subpeaks: SubpeakReport,
}

impl DiagonalAnalysis {
    pub fn new(cut: &DiagonalCut, model: &ScatteringModel) -> Self {
        let w = model.params().omega_m;
        let e = model.eigen();
        DiagonalAnalysis {
            sidebands: sidebands(cut, w, e.r2, PEAK_FRACTION),
            subpeaks: subpeaks(cut, w, e.r1, PEAK_FRACTION),
        }
    }
}

#[derive(Serialize)]
struct GridPayload<'a> {
    label: &'a str,
    grid: &'a SpectrumGrid,
    analysis: GridAnalysis,
}

#[derive(Serialize)]
struct DiagonalPayload<'a> {
    cut: &'a DiagonalCut,
    analysis: DiagonalAnalysis,
}

#[derive(Serialize)]
struct ComparisonPayload<'a> {
    report: &'a ComparisonReport,
    oracle_csv: String,
    analytic_csv: String,
}

/// Everything a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub outputs: Vec<PathBuf>,
    pub grids: Vec<SpectrumGrid>,
    pub diagonal: Option<DiagonalCut>,
    pub resonances: Vec<ResonanceLine>,
    pub comparison: Option<ComparisonReport>,
    pub truncation: Option<TruncationRecord>,
}

fn name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Probe points of every grid plus the diagonal's end, quarter and centre
/// points.
fn probes(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for g in &cfg.grids {
        pts.extend(probe_points(&g.p.values(), &g.q_axis().values()));
    }
    if cfg.jobs.contains(&Job::Diagonal) {
        let d = &cfg.diagonal;
        pts.extend((0..5).map(|i| {
            let x = d.min + 0.25 * i as f64 * (d.max - d.min);
            (x, x)
        }));
    }
    pts
}

/// Validates `cfg`, runs its jobs in a fixed order and writes the results
/// under `out`.
///
/// An oracle run whose intracavity residual exceeds the configured threshold
/// still writes its report, then returns a convergence error.
pub fn run(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let stem = &cfg.stem;
    let mut outcome = RunOutcome::default();
    let mut model = ScatteringModel::new(&cfg.model, &cfg.wavepacket, cfg.truncation)?;

    let analytic = cfg
        .jobs
        .iter()
        .any(|j| matches!(j, Job::Spectrum | Job::Diagonal | Job::OracleCompare));
    let record = if analytic && cfg.check_truncation {
        let (m, rec) = converge_truncation(&model, &cfg.state, &probes(cfg), exec)?;
        model = m;
        rec
    } else {
        TruncationRecord::unchecked(cfg.truncation)
    };
    outcome.truncation = Some(record.clone());
    let stamp = |meta: &mut crate::spectral::SpectrumMeta| {
        meta.truncation = record.clone();
        meta.notes = cfg.notes.clone();
    };

    let mut residual_failure = None;
    for job in dedup(&cfg.jobs) {
        match job {
            Job::Spectrum => {
                for g in &cfg.grids {
                    log::info!("{stem}: spectrum grid `{}`", g.label);
                    let mut grid = spectrum_grid(&model, &cfg.state, &g.p.values(), &g.q_axis().values(), exec)?;
                    stamp(&mut grid.meta);
                    let csv = out.join(format!("{stem}_{}.csv", g.label));
                    let json = out.join(format!("{stem}_{}.json", g.label));
                    write_grid_csv(&csv, &grid)?;
                    let payload = GridPayload {
                        label: &g.label,
                        grid: &grid,
                        analysis: GridAnalysis::new(&grid),
                    };
                    write_json(&json, &Document::new("spectrum-grid", "analytic", cfg, payload))?;
                    outcome.outputs.extend([csv, json]);
                    outcome.grids.push(grid);
                }
            }
            Job::Diagonal => {
                log::info!("{stem}: diagonal cut");
                let mut cut = diagonal_spectrum(&model, &cfg.state, &cfg.diagonal.values(), exec)?;
                stamp(&mut cut.meta);
                let csv = out.join(format!("{stem}_diagonal.csv"));
                let json = out.join(format!("{stem}_diagonal.json"));
                write_diagonal_csv(&csv, &cut)?;
                let payload = DiagonalPayload {
                    cut: &cut,
                    analysis: DiagonalAnalysis::new(&cut, &model),
                };
                write_json(&json, &Document::new("diagonal-cut", "analytic", cfg, payload))?;
                outcome.outputs.extend([csv, json]);
                outcome.diagonal = Some(cut);
            }
            Job::Resonances => {
                let r = &cfg.resonances;
                let mut lines = Vec::new();
                for n0 in cfg.state.support() {
                    lines.extend(resonance_lines(&cfg.model, n0, r.j_max, r.s_max)?);
                }
                let json = out.join(format!("{stem}_resonances.json"));
                write_json(&json, &Document::new("resonance-lines", "analytic", cfg, &lines))?;
                outcome.outputs.push(json);
                outcome.resonances = lines;
            }
            Job::FcTable => {
                let csv = out.join(format!("{stem}_fc.csv"));
                write_fc_csv(&csv, model.table())?;
                outcome.outputs.push(csv);
            }
            Job::OracleCompare => {
                log::info!("{stem}: time-domain oracle");
                let mut cmp = run_comparison(&model, &cfg.state, &cfg.oracle, exec)?;
                stamp(&mut cmp.oracle.meta);
                stamp(&mut cmp.analytic.meta);
                let oracle_csv = out.join(format!("{stem}_oracle.csv"));
                let analytic_csv = out.join(format!("{stem}_oracle_analytic.csv"));
                let oracle_json = out.join(format!("{stem}_oracle.json"));
                let report_json = out.join(format!("{stem}_comparison.json"));
                write_grid_csv(&oracle_csv, &cmp.oracle)?;
                write_grid_csv(&analytic_csv, &cmp.analytic)?;
                write_json(&oracle_json, &Document::new("spectrum-grid", "time-domain", cfg, &cmp.oracle))?;
                let payload = ComparisonPayload {
                    report: &cmp.report,
                    oracle_csv: name(&oracle_csv),
                    analytic_csv: name(&analytic_csv),
                };
                write_json(&report_json, &Document::new("oracle-comparison", "comparison", cfg, payload))?;
                outcome.outputs.extend([oracle_csv, analytic_csv, oracle_json, report_json]);
                if !cmp.report.residual_ok {
                    residual_failure = Some(Error::Convergence {
                        what: format!(
                            "oracle decay by t_final = {} (increase oracle.t_final)",
                            cmp.report.t_final
                        ),
                        achieved: cmp.report.residual,
                        tolerance: cfg.oracle.residual_tolerance,
                    });
                }
                outcome.comparison = Some(cmp.report);
            }
        }
    }
    match residual_failure {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

fn dedup(jobs: &[Job]) -> Vec<Job> {
    let mut seen = Vec::new();
    for &j in jobs {
        if !seen.contains(&j) {
            seen.push(j);
        }
    }
    seen
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub value: f64,
    /// Sub-directory relative to the sweep directory.
    pub dir: String,
    pub ok: bool,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepManifest {
    pub schema_version: &'static str,
    pub param: String,
    pub values: Vec<f64>,
    pub base: RunConfig,
    pub failed: usize,
    pub runs: Vec<SweepEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// Runs `base` once per value of `param`, each into its own sub-directory,
/// and writes a manifest. Failing points are recorded, not propagated.
pub fn sweep(base: &RunConfig, param: &str, values: &[f64], out: &Path, exec: Execution) -> Result<SweepManifest> {
    base.clone().set_scalar(param, 0.0)?;
    std::fs::create_dir_all(out)?;
    let mut runs = Vec::with_capacity(values.len());
    for (index, &value) in values.iter().enumerate() {
        let dir = format!("{index:03}_{param}");
        let mut cfg = base.clone();
        cfg.set_scalar(param, value)?;
        cfg.notes.push(format!("sweep point {index}: {param} = {value}"));
        let result = run(&cfg, &out.join(&dir), exec);
        let (ok, outputs, error) = match result {
            Ok(o) => (true, o.outputs.iter().map(|p| name(p)).collect(), None),
            Err(e) => {
                log::warn!("sweep point {index} ({param} = {value}) failed: {e}");
                (false, Vec::new(), Some(ErrorReport::from(&e)))
            }
        };
        runs.push(SweepEntry {
            index,
            value,
            dir,
            ok,
            outputs,
            error,
            config: cfg,
        });
    }
    let manifest = SweepManifest {
        schema_version: SCHEMA_VERSION,
        param: param.to_string(),
        values: values.to_vec(),
        base: base.clone(),
        failed: runs.iter().filter(|r| !r.ok).count(),
        runs,
    };
    write_json(&out.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}
