//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances are fixed here, not configurable.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use optoscatter::config::RunConfig;
use optoscatter::fock::{fc_overlap, oracle_min_dim, oracle_overlap_matrix, FcTable};
use optoscatter::oracle::{evolve, initialize, run_comparison, BathGrid, ComparisonReport, EvolveOptions, OracleConfig};
use optoscatter::presets;
use optoscatter::run::{run, DiagonalAnalysis, GridAnalysis, RunOutcome, PEAK_FRACTION};
use optoscatter::spectral::{
    delta_shift, eigen_energy, nearest_line, nu_shift, resonance_lines, spectrum_grid, spectrum_point, Frame,
    ScatteringModel, Truncation,
};
use optoscatter::{Execution, MechanicalInitState, ModelParams, Result, WavepacketParams};

const FC_TOL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-6;
const COMPLETENESS_S: usize = 60;
/// Shift identities: a few ulps of the largest term.
const SHIFT_ULPS: f64 = 4.0;
const ORACLE_L2_TOL: f64 = 0.05;
const RESIDUAL_TOL: f64 = 1e-4;
const LINEAR_TOL: f64 = 0.02;
const OFF_J_TOL: f64 = 1e-12;
const SWAP_TOL: f64 = 1e-12;
const TRUNCATION_TOL: f64 = 5e-3;

const G1: [f64; 3] = [0.1, 0.4, 0.8];
const G2: [f64; 3] = [0.01, 0.05, 0.1];

fn sweep() -> impl Iterator<Item = ModelParams> {
    G1.into_iter()
        .flat_map(|g1| G2.into_iter().map(move |g2| ModelParams::new(g1, g2, 0.1).unwrap()))
}

type Outcome = Result<(bool, String)>;

fn fc_vs_matrix() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in sweep() {
        for m in 0..=2 {
            for n in 0..=2 {
                let block = oracle_overlap_matrix(m, n, &p, 10, oracle_min_dim(10))?;
                for j in 0..=10 {
                    for s in 0..=10 {
                        worst = worst.max((fc_overlap(m, j, n, s, &p)? - block[(j, s)]).norm());
                    }
                }
            }
        }
    }
    Ok((worst < FC_TOL, format!("max |closed form − matrix| = {worst:.2e} (tol {FC_TOL:.0e})")))
}

fn orthonormality_completeness() -> Outcome {
    let (mut ortho, mut deficit): (f64, f64) = (0.0, 0.0);
    for p in sweep() {
        for m in 0..=2 {
            for j in 0..=10 {
                for s in 0..=10 {
                    let want = if j == s { 1.0 } else { 0.0 };
                    ortho = ortho.max((fc_overlap(m, j, m, s, &p)? - want).norm());
                }
            }
            for n in 0..=2 {
                for j in 0..=10 {
                    let mut sum = 0.0;
                    for s in 0..=COMPLETENESS_S {
                        sum += fc_overlap(m, j, n, s, &p)?.norm_sqr();
                    }
                    deficit = deficit.max(1.0 - sum);
                }
            }
        }
    }
    Ok((
        ortho < ORTHO_TOL && deficit <= COMPLETENESS_TOL,
        format!(
            "max |⟨j|s⟩ − δ| = {ortho:.2e} (tol {ORTHO_TOL:.0e}); max 1 − Σ_s≤{COMPLETENESS_S} |FC|² = {deficit:.2e} (tol {COMPLETENESS_TOL:.0e})"
        ),
    ))
}

fn shift_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in sweep() {
        for (shift, m) in [(delta_shift(&p)?, 1), (nu_shift(&p)?, 2)] {
            let e = eigen_energy(m, 0, &p, Frame::Rotating)?;
            let scale = shift.abs().max(p.g1 * p.g1 / p.omega_m).max(p.omega_m);
            worst = worst.max((shift + e).abs() / (scale * f64::EPSILON));
        }
    }
    Ok((worst <= SHIFT_ULPS, format!("max |shift + E′(m,0)| = {worst:.1} ulp (tol {SHIFT_ULPS} ulp)")))
}

fn fig2b() -> Result<(ModelParams, WavepacketParams)> {
    let preset = presets::find("fig2b")?;
    Ok((preset.model(), preset.wavepacket()?))
}

fn describe(r: &ComparisonReport, secs: f64) -> String {
    format!(
        "L2 = {:.4} (tol {ORACLE_L2_TOL}), L∞ = {:.4}, residual = {:.2e} (tol {RESIDUAL_TOL:.0e}), drift = {:.1e}; \
         {} modes, K = {:.3}, N_b = {}, t = −{:.1}…{}, dt = {:.4}, {:.0} s",
        r.l2_relative,
        r.linf_relative,
        r.residual,
        r.norm_drift,
        r.bath.n_modes,
        r.bath.half_width,
        r.n_b,
        r.lead_time,
        r.t_final,
        r.dt,
        secs
    )
}

fn oracle_check(cfg: OracleConfig) -> Outcome {
    let (p, wp) = fig2b()?;
    let model = ScatteringModel::new(&p, &wp, Truncation::default())?;
    let start = Instant::now();
    let cmp = run_comparison(&model, &MechanicalInitState::ground(), &cfg, Execution::default())?;
    let r = cmp.report;
    let ok = r.l2_relative < ORACLE_L2_TOL && r.residual < RESIDUAL_TOL;
    Ok((ok, describe(&r, start.elapsed().as_secs_f64())))
}

/// fig2b at `t_final = 20/γ_c` with 201 modes and six phonon levels.
/// The band is chosen so the recurrence time is twice the run; at the
/// margin used by default, 201 modes spaced wider than ε cannot hold the
/// wavepacket.
fn oracle_headline() -> Outcome {
    let (p, _) = fig2b()?;
    oracle_check(OracleConfig {
        n_modes: Some(201),
        bandwidth: Some(FRAC_PI_2),
        n_b: 6,
        t_final: Some(20.0 / p.gamma_c),
        bins: 41,
        ..Default::default()
    })
}

/// Same comparison run until the input has been absorbed (`εt = 6`).
fn oracle_long() -> Outcome {
    oracle_check(OracleConfig {
        n_b: 4,
        t_final: Some(600.0),
        bins: 41,
        ..Default::default()
    })
}

fn linear_limit() -> Outcome {
    let p = ModelParams::new(0.0, 0.0, 0.1)?;
    let wp = WavepacketParams::new(0.0, 0.0, 0.03)?;
    let model = ScatteringModel::new(&p, &wp, Truncation::default())?;
    let state = MechanicalInitState::ground();

    let cfg = OracleConfig {
        n_modes: Some(401),
        bandwidth: Some(2.1),
        n_b: 1,
        t_final: Some(400.0),
        min_norm_fraction: 0.98,
        bins: 41,
        window: Some((-0.5, 0.5)),
        ..Default::default()
    };
    let r = run_comparison(&model, &state, &cfg, Execution::default())?.report;
    let spectrum_ok = r.l2_relative < LINEAR_TOL && r.residual_ok;

    // analytic amplitudes into j ≠ n0
    let axis: Vec<f64> = (0..41).map(|i| -0.5 + 0.025 * i as f64).collect();
    let (mut on, mut off): (f64, f64) = (0.0, 0.0);
    for &dp in &axis {
        for &dq in &axis {
            on = on.max(model.total(0, 0, dp, dq)?.norm());
            for j in 1..=4 {
                off = off.max(model.total(0, j, dp, dq)?.norm());
            }
        }
    }
    let analytic_off = off / on;

    // oracle population outside the initial phonon level
    let table = FcTable::new(&p, 2)?;
    let bath = BathGrid::new(101, 2.1)?;
    let mut s0 = initialize(&wp, 0, 2, &bath, 0.5)?;
    s0.rewind(10.0, p.omega_m)?;
    let opts = EvolveOptions {
        t_final: 60.0,
        dt: 0.04,
        norm_tolerance: 1e-8,
        check_every: 50,
    };
    let s1 = evolve(&s0, &table, &opts, Execution::default())?;
    let mut oracle_off: f64 = s1.a(1).norm().max(s1.b(1, 0).norm());
    for k in 0..bath.n_modes {
        oracle_off = oracle_off.max(s1.b(1, k).norm());
        for q in 0..=k {
            oracle_off = oracle_off.max(s1.c(1, k, q).norm());
        }
    }

    let ok = spectrum_ok && analytic_off < OFF_J_TOL && oracle_off < OFF_J_TOL;
    Ok((
        ok,
        format!(
            "L2 = {:.2e} (tol {LINEAR_TOL}), residual = {:.1e}; off-j amplitude: analytic {analytic_off:.1e}, oracle {oracle_off:.1e} (tol {OFF_J_TOL:.0e})",
            r.l2_relative, r.residual
        ),
    ))
}

fn symmetries() -> Outcome {
    let p = ModelParams::new(0.4, 0.05, 0.1)?;
    let wp = WavepacketParams::new(-0.3, 0.2, 0.05)?;
    let state = MechanicalInitState::ground();
    let model = ScatteringModel::new(&p, &wp, Truncation::default())?;
    let swapped = model.with_wavepacket(&wp.swapped())?;
    let axis: Vec<f64> = (0..61).map(|i| -1.5 + 0.05 * i as f64).collect();

    let grid = spectrum_grid(&model, &state, &axis, &axis, Execution::default())?;
    let n = axis.len();
    let mut mirror_exact = true;
    for i in 0..n {
        for k in 0..n {
            mirror_exact &= grid.get(i, k) == grid.get(k, i);
        }
    }
    // the pointwise evaluator, without the grid's mirroring
    let (mut point, mut swap): (f64, f64) = (0.0, 0.0);
    let other = spectrum_grid(&swapped, &state, &axis, &axis, Execution::default())?;
    for (i, &a) in axis.iter().enumerate().step_by(3) {
        for &b in axis.iter().step_by(5) {
            point = point.max((spectrum_point(&model, &state, a, b)? - spectrum_point(&model, &state, b, a)?).abs());
        }
        for k in 0..n {
            swap = swap.max((grid.get(i, k) - other.get(i, k)).abs());
        }
    }
    let max = grid.max();
    let (point, swap) = (point / max, swap / max);
    Ok((
        mirror_exact && swap < SWAP_TOL,
        format!(
            "grid S(p,q) = S(q,p) exactly: {mirror_exact}; pointwise defect {point:.1e}; Δ1↔Δ2 relative change {swap:.1e} (tol {SWAP_TOL:.0e})"
        ),
    ))
}

struct PresetRun {
    cfg: RunConfig,
    model: ScatteringModel,
    outcome: RunOutcome,
}

fn run_preset(id: &str, dir: &std::path::Path) -> Result<PresetRun> {
    let cfg = presets::config(id)?;
    let outcome = run(&cfg, &dir.join(id), Execution::default())?;
    let used = outcome.truncation.as_ref().map(|t| t.used).unwrap_or(cfg.truncation);
    let model = ScatteringModel::new(&cfg.model, &cfg.wavepacket, used)?;
    Ok(PresetRun { cfg, model, outcome })
}

fn fig2a_single_peak(r: &PresetRun) -> Outcome {
    let a = GridAnalysis::new(&r.outcome.grids[0]);
    let n = a.dominance.peaks_above_threshold.len();
    Ok((n == 1, format!("{n} maxima above 10% of the global maximum (want 1)")))
}

fn fig2c_ridge(r: &PresetRun, literal: bool) -> Outcome {
    let delta = delta_shift(&r.cfg.model)?;
    let tol = 0.5 * r.cfg.model.gamma_c;
    let zoom = r.outcome.grids.iter().find(|g| g.p_axis.len() == presets::ZOOM_GRID.points).unwrap();
    let ridge = GridAnalysis::new(zoom).ridge.unwrap();
    if literal {
        let off = (ridge.sum + delta).abs();
        return Ok((
            off <= tol,
            format!("Δp+Δq at the maximum = {:.4}, −δ = {:.4}: |diff| = {off:.4} (tol γ_c/2 = {tol})", ridge.sum, -delta),
        ));
    }
    // shape is reported only: at this ε the peak is nearly round
    let off = (ridge.p + delta).abs().max((ridge.q + delta).abs());
    Ok((
        off <= tol,
        format!(
            "maximum at ({:.4}, {:.4}), −δ = {:.4}: max offset {off:.4} (tol {tol}); FWHM along/across = {:.3}/{:.3}; Δp+Δq = {:.4} (−2δ = {:.4})",
            ridge.p,
            ridge.q,
            -delta,
            ridge.width_along,
            ridge.width_across,
            ridge.sum,
            -2.0 * delta
        ),
    ))
}

fn family(runs: &[&PresetRun], predicted: impl Fn(&ModelParams) -> bool, seen: impl Fn(&DiagonalAnalysis) -> bool) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs {
        let a = DiagonalAnalysis::new(r.outcome.diagonal.as_ref().unwrap(), &r.model);
        let (want, got) = (predicted(&r.cfg.model), seen(&a));
        ok &= want == got;
        parts.push(format!("{} {}/{}", r.cfg.stem, if got { "yes" } else { "no" }, if want { "yes" } else { "no" }));
    }
    Ok((ok, format!("observed/predicted: {}", parts.join(", "))))
}

fn fig3b_lines(r: &PresetRun) -> Outcome {
    let grid = &r.outcome.grids[0];
    let a = GridAnalysis::new(grid);
    let t = r.model.truncation();
    let lines = resonance_lines(&r.cfg.model, 0, t.j_max, t.s_max)?;
    let tol = 0.5 * r.cfg.model.gamma_c;
    let mut worst: f64 = 0.0;
    for m in &a.maxima {
        let (_, d) = nearest_line(&lines, m.p, m.q).unwrap();
        worst = worst.max(d);
    }
    Ok((
        worst <= tol,
        format!(
            "{} maxima above {}% of the global maximum; farthest from a line: {worst:.4} (tol γ_c/2 = {tol})",
            a.maxima.len(),
            PEAK_FRACTION * 100.0
        ),
    ))
}

fn truncation_convergence(runs: &[&PresetRun]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for r in runs {
        let fine = r.model.with_truncation(r.model.truncation().doubled())?;
        let mut check = |name: &str, coarse: &[f64], fine: &[f64]| {
            let max = coarse.iter().copied().fold(0.0, f64::max);
            let change = coarse.iter().zip(fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / max;
            if change >= worst {
                worst = change;
                worst_at = format!("{} {name}", r.cfg.stem);
            }
        };
        for (g, spec) in r.outcome.grids.iter().zip(&r.cfg.grids) {
            let f = spectrum_grid(&fine, &r.cfg.state, &g.p_axis, &g.q_axis, Execution::default())?;
            check(&spec.label, &g.values, &f.values);
        }
        if let Some(cut) = &r.outcome.diagonal {
            let f = optoscatter::spectral::diagonal_spectrum(&fine, &r.cfg.state, &cut.axis, Execution::default())?;
            check("diagonal", &cut.values, &f.values);
        }
    }
    Ok((
        worst < TRUNCATION_TOL,
        format!("max |S(2N) − S(N)| / max S = {worst:.2e} (tol {TRUNCATION_TOL:.0e}), at {worst_at}"),
    ))
}

struct Board {
    failed: Vec<String>,
}

impl Board {
    fn line(&mut self, id: &str, title: &str, outcome: Outcome) {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("{} {id} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes us skips the run
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let mut board = Board { failed: Vec::new() };
    board.line("1", "FC closed form vs matrix oracle", fc_vs_matrix());
    board.line("2", "orthonormality and completeness", orthonormality_completeness());
    board.line("3", "shift identities", shift_identities());
    board.line("4", "oracle equivalence, fig2b at t = 20/γ_c", oracle_headline());
    board.line("4+", "oracle equivalence, fig2b run to εt = 6 (supplementary)", oracle_long());
    board.line("5", "linear limit", linear_limit());
    board.line("6", "symmetries", symmetries());

    let dir = tempfile::tempdir().expect("temporary directory");
    let ids = [
        "fig2a", "fig2c", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c", "fig5a", "fig5b", "fig5c",
    ];
    let mut runs = Vec::new();
    for id in ids {
        match run_preset(id, dir.path()) {
            Ok(r) => runs.push(r),
            Err(e) => board.line("7", &format!("preset {id}"), Err(e)),
        }
    }
    let get = |id: &str| runs.iter().find(|r| r.cfg.stem == id);
    let by_prefix = |prefix: &str| -> Vec<&PresetRun> { runs.iter().filter(|r| r.cfg.stem.starts_with(prefix)).collect() };

    if let Some(r) = get("fig2a") {
        board.line("7a", "fig2a single dominant peak", fig2a_single_peak(r));
    }
    if let Some(r) = get("fig2c") {
        board.line("7b", "fig2c ridge maximum at −δ per photon", fig2c_ridge(r, false));
        board.line("7b'", "fig2c ridge centre Δp+Δq = −δ (literal reading)", fig2c_ridge(r, true));
    }
    board.line(
        "7c",
        "fig4 sidebands iff g1 > γ_c",
        family(&by_prefix("fig4"), |p| p.g1 > p.gamma_c, |a| a.sidebands.resolved()),
    );
    let mut fine = by_prefix("fig3");
    fine.extend(by_prefix("fig5"));
    board.line(
        "7d",
        "fig3/fig5 subpeaks iff 2 g2 > γ_c",
        family(&fine, |p| 2.0 * p.g2 > p.gamma_c, |a| a.subpeaks.resolved()),
    );
    if let Some(r) = get("fig3b") {
        board.line("8", "fig3b maxima on resonance lines", fig3b_lines(r));
    }
    board.line("9", "truncation doubling", truncation_convergence(&runs.iter().collect::<Vec<_>>()));

    if board.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: FAILED {}", board.failed.join(", "));
        std::process::exit(1);
    }
}
