//! Fixed-step integration of the amplitude equations on the discrete bath.
//!
//! With `g = sqrt(γ_c dk / 2π)`, `U_{js} = ⟨j|s̃(1)⟩`, `V_{ss′} = ⟨s̃(1)|s̃′(2)⟩`:
//!
//! ```text
//! i Ȧ_{s′}   = E′(2,s′) A_{s′} + √2 g Σ_s V*_{ss′} Σ_k B_{s,k}
//! i Ḃ_{s,k}  = (E′(1,s) + Δk) B_{s,k} + √2 g Σ_{s′} V_{ss′} A_{s′}
//!              + g Σ_j U*_{js} R_{j,k},   R_{j,k} = Σ_{p≠k} c_{j,pk} + √2 c_{j,kk}
//! i ċ_{j,pq} = (jω_M + Δp + Δq) c_{j,pq} + g Σ_s U_{js} (B_{s,p} + B_{s,q})   (p > q)
//! i ċ_{j,pp} = (jω_M + 2Δp) c_{j,pp} + √2 g Σ_s U_{js} B_{s,p}
//! ```
//!
//! The diagonal part is integrated exactly and the couplings with classical
//! RK4 in the interaction picture (integrating-factor RK4), which keeps the
//! scheme fixed-step and fourth order while removing the bare detunings
//! from the stability limit.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::SQRT_2;

use super::state::{pair_count, pair_index, OracleState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fock::FcTable;
use crate::spectral::{eigen_energy, Frame};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub t_final: f64,
    pub dt: f64,
    /// Allowed `|‖ψ(t)‖² − ‖ψ(0)‖²|`.
    pub norm_tolerance: f64,
    /// Norm is checked every this many steps.
    pub check_every: usize,
}

/// Largest bare frequency in the system, used by the default step rule.
pub fn max_frequency(state: &OracleState, table: &FcTable) -> Result<f64> {
    let params = table.params();
    let n_b = state.n_b();
    let k = state.bath().half_width;
    let mut w: f64 = (n_b - 1) as f64 * params.omega_m + 2.0 * k;
    for s in 0..n_b {
        w = w.max(eigen_energy(1, s, params, Frame::Rotating)?.abs() + k);
        w = w.max(eigen_energy(2, s, params, Frame::Rotating)?.abs());
    }
    Ok(w)
}

/// Default step: `0.4 / Ω_max`, capped at `0.02 / sqrt(γ_c K)` (the
/// collective cavity–band coupling) and `0.05 / γ_c`. The free rotation is
/// exact, so the bound comes from the norm drift of the coupling stages
/// (about 1e−9 over `20/γ_c` at the fig2 scales), not from stability.
pub fn default_dt(state: &OracleState, table: &FcTable) -> Result<f64> {
    let w = max_frequency(state, table)?;
    let gamma = table.params().gamma_c;
    let collective = (gamma * state.bath().half_width).sqrt();
    Ok((0.4 / w).min(0.02 / collective).min(0.05 / gamma))
}

/// Precomputed pieces of the equations of motion. Only the one-photon
/// blocks (`A`, `B`) are ever materialized per stage; the two-photon block
/// is driven purely by `W = U·B`, and its free phases factorize per mode,
/// so stage values of `C` are regenerated on the fly from `y_C`.
struct System {
    n_b: usize,
    n: usize,
    np: usize,
    g: f64,
    u: Vec<Complex64>, // u[j * n_b + s]
    v: Vec<Complex64>, // v[s * n_b + t]
    omega_ab: Vec<f64>, // diagonal frequencies of [A | B]
    det: Vec<f64>,
    omega_m: f64,
    off_b: usize,
    off_c: usize,
}

/// Per-mode phase factors `e^{−iΔ_p τ}` and per-level `e^{−ijω_M τ}`.
struct Phases {
    mode: Vec<Complex64>,
    level: Vec<Complex64>,
}

impl Phases {
    #[inline]
    fn row(&self, j: usize, p: usize) -> Complex64 {
        self.level[j] * self.mode[p]
    }
}

impl System {
    fn new(state: &OracleState, table: &FcTable) -> Result<Self> {
        let params = table.params();
        let n_b = state.n_b();
        if table.max_index() + 1 < n_b {
            return Err(Error::Range {
                what: "FC table for oracle basis",
                index: n_b - 1,
                max: table.max_index(),
            });
        }
        let bath = state.bath();
        let n = bath.n_modes;
        let (off_b, off_c, _) = OracleState::offsets(n_b, n);
        let det = bath.detunings();
        let mut omega_ab = vec![0.0; off_c];
        for s in 0..n_b {
            omega_ab[s] = eigen_energy(2, s, params, Frame::Rotating)?;
            let e1 = eigen_energy(1, s, params, Frame::Rotating)?;
            for k in 0..n {
                omega_ab[off_b + s * n + k] = e1 + det[k];
            }
        }
        let mut u = Vec::with_capacity(n_b * n_b);
        let mut v = Vec::with_capacity(n_b * n_b);
        for a in 0..n_b {
            for b in 0..n_b {
                u.push(table.get(0, a, 1, b));
                v.push(table.get(1, a, 2, b));
            }
        }
        Ok(System {
            n_b,
            n,
            np: pair_count(n),
            g: bath.coupling(params),
            u,
            v,
            omega_ab,
            det,
            omega_m: params.omega_m,
            off_b,
            off_c,
        })
    }

    fn phases(&self, tau: f64) -> Phases {
        // τ = 0 gives exact ones
        Phases {
            mode: self.det.iter().map(|d| Complex64::from_polar(1.0, -d * tau)).collect(),
            level: (0..self.n_b)
                .map(|j| Complex64::from_polar(1.0, -(j as f64) * self.omega_m * tau))
                .collect(),
        }
    }

    /// `W_{j,k} = Σ_s U_{js} B_{s,k}` for the `[A | B]` vector `ab`.
    fn w(&self, ab: &[Complex64]) -> Vec<Complex64> {
        let (n_b, n) = (self.n_b, self.n);
        let b = &ab[self.off_b..];
        let mut w = vec![ZERO; n_b * n];
        for j in 0..n_b {
            for s in 0..n_b {
                let ujs = self.u[j * n_b + s];
                for (wk, bk) in w[j * n..(j + 1) * n].iter_mut().zip(&b[s * n..(s + 1) * n]) {
                    *wk += ujs * bk;
                }
            }
        }
        w
    }

    /// `R_{j,k} = Σ_{p≠k} c_{j,pk} + √2 c_{j,kk}` of the stage whose packed
    /// entries are `a_{j,pq} y_{j,pq} + β b_{j,pq} K_{j,pq}(w)`, with `a`, `b`
    /// phase factors and `K(w)` the coupling term; one streaming pass per `j`.
    fn r(&self, y_c: &[Complex64], exec: Execution, a: &Phases, beta: f64, b: &Phases, w: &[Complex64]) -> Vec<Complex64> {
        let (n, np) = (self.n, self.np);
        let kg = -I * self.g * beta;
        let rows = exec.map_indices(self.n_b, |j| {
            let cj = &y_c[j * np..(j + 1) * np];
            let wj = &w[j * n..(j + 1) * n];
            let mut r = vec![ZERO; n];
            for p in 0..n {
                let start = pair_index(p, 0);
                let row = &cj[start..start + p + 1];
                let ra = a.row(j, p);
                let rb = kg * b.row(j, p);
                let wp = wj[p];
                let mut acc = ZERO;
                for (((rq, &y), (&am, &bm)), &wq) in r[..p]
                    .iter_mut()
                    .zip(&row[..p])
                    .zip(a.mode[..p].iter().zip(&b.mode[..p]))
                    .zip(&wj[..p])
                {
                    let c = ra * am * y + rb * bm * (wp + wq);
                    *rq += c;
                    acc += c;
                }
                let diag = ra * a.mode[p] * row[p] + rb * b.mode[p] * SQRT_2 * wp;
                r[p] += acc + SQRT_2 * diag;
            }
            r
        });
        rows.concat()
    }

    /// `−i H_int` restricted to `[A | B]`, given the stage's `R`.
    fn coupling_ab(&self, ab: &[Complex64], r: &[Complex64], out: &mut [Complex64]) {
        let (n_b, n, g) = (self.n_b, self.n, self.g);
        let a = &ab[..self.off_b];
        let b = &ab[self.off_b..];
        for (sp, oa) in out[..self.off_b].iter_mut().enumerate() {
            let mut acc = ZERO;
            for s in 0..n_b {
                let bsum: Complex64 = b[s * n..(s + 1) * n].iter().sum();
                acc += self.v[s * n_b + sp].conj() * bsum;
            }
            *oa = -I * SQRT_2 * g * acc;
        }
        let out_b = &mut out[self.off_b..];
        for s in 0..n_b {
            let mut va = ZERO;
            for sp in 0..n_b {
                va += self.v[s * n_b + sp] * a[sp];
            }
            for k in 0..n {
                let mut acc = SQRT_2 * va;
                for j in 0..n_b {
                    acc += self.u[j * n_b + s].conj() * r[j * n + k];
                }
                out_b[s * n + k] = -I * g * acc;
            }
        }
    }
}

fn phase(omega: &[f64], h: f64) -> Vec<Complex64> {
    omega.iter().map(|w| Complex64::from_polar(1.0, -w * h)).collect()
}

/// Integrates `state` to `t_final` with fixed steps of at most `dt`.
pub fn evolve(
    state: &OracleState,
    table: &FcTable,
    opts: &EvolveOptions,
    exec: Execution,
) -> Result<OracleState> {
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return Err(Error::validation("oracle.dt", "must be finite and > 0"));
    }
    if !(opts.t_final.is_finite() && opts.t_final >= state.t) {
        return Err(Error::validation("oracle.t_final", "must be finite and not before the state time"));
    }
    let sys = System::new(state, table)?;
    let span = opts.t_final - state.t;
    let steps = (span / opts.dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let off_c = sys.off_c;
    let (n, n_b) = (sys.n, sys.n_b);

    // small [A | B] block: explicit Lawson RK4
    let half_ab = phase(&sys.omega_ab, 0.5 * h);
    let full_ab = phase(&sys.omega_ab, h);
    // C block: phases φ_{j,pq} = level_j · mode_p · mode_q
    let ph = sys.phases(0.5 * h);
    let pf = sys.phases(h);
    let one = sys.phases(0.0);

    let mut y = state.data.clone();
    let norm0: f64 = y.iter().map(|x| x.norm_sqr()).sum();
    let mut k = vec![ZERO; off_c];
    let mut stage = vec![ZERO; off_c];
    let mut acc = vec![ZERO; off_c];
    let check_every = opts.check_every.max(1);

    for step in 0..steps {
        let (y_ab, y_c) = y.split_at_mut(off_c);

        // k1 = N(y)
        let w1 = sys.w(y_ab);
        let r1 = sys.r(y_c, exec, &one, 0.0, &one, &w1);
        sys.coupling_ab(y_ab, &r1, &mut k);
        for i in 0..off_c {
            acc[i] = full_ab[i] * (y_ab[i] + h / 6.0 * k[i]);
            stage[i] = half_ab[i] * (y_ab[i] + 0.5 * h * k[i]);
        }
        // k2 = N(φ½ (y + h/2 k1))
        let w2 = sys.w(&stage);
        let r2 = sys.r(y_c, exec, &ph, 0.5 * h, &ph, &w1);
        sys.coupling_ab(&stage, &r2, &mut k);
        for i in 0..off_c {
            acc[i] += h / 3.0 * half_ab[i] * k[i];
            stage[i] = half_ab[i] * y_ab[i] + 0.5 * h * k[i];
        }
        // k3 = N(φ½ y + h/2 k2)
        let w3 = sys.w(&stage);
        let r3 = sys.r(y_c, exec, &ph, 0.5 * h, &one, &w2);
        sys.coupling_ab(&stage, &r3, &mut k);
        for i in 0..off_c {
            acc[i] += h / 3.0 * half_ab[i] * k[i];
            stage[i] = full_ab[i] * y_ab[i] + h * half_ab[i] * k[i];
        }
        // k4 = N(φ y + h φ½ k3)
        let w4 = sys.w(&stage);
        let r4 = sys.r(y_c, exec, &pf, h, &ph, &w3);
        sys.coupling_ab(&stage, &r4, &mut k);
        for i in 0..off_c {
            y_ab[i] = acc[i] + h / 6.0 * k[i];
        }

        // y_C ← φ (y + h/6 k1) + h/3 φ½ (k2 + k3) + h/6 k4, row by row
        let mut rows: Vec<&mut [Complex64]> = Vec::with_capacity(n_b * n);
        let mut rest = &mut *y_c;
        for _ in 0..n_b {
            for p in 0..n {
                let (head, tail) = rest.split_at_mut(p + 1);
                rows.push(head);
                rest = tail;
            }
        }
        let w23: Vec<Complex64> = w2.iter().zip(&w3).map(|(a, b)| a + b).collect();
        let kg = -I * sys.g;
        let (w1, w23, w4) = (&w1, &w23, &w4);
        exec.for_each_mut(&mut rows, |idx, row| {
            let (j, p) = (idx / n, idx % n);
            let (rh, rf) = (ph.row(j, p), pf.row(j, p));
            let (w1j, w23j, w4j) = (&w1[j * n..(j + 1) * n], &w23[j * n..(j + 1) * n], &w4[j * n..(j + 1) * n]);
            let (c1, c23, c4) = (kg * h / 6.0, rh * kg * h / 3.0, kg * h / 6.0);
            let (a1, a23, a4) = (w1j[p], w23j[p], w4j[p]);
            let (off, diag) = row.split_at_mut(p);
            for (q, c) in off.iter_mut().enumerate() {
                *c = rf * pf.mode[q] * (*c + c1 * (a1 + w1j[q]))
                    + c23 * ph.mode[q] * (a23 + w23j[q])
                    + c4 * (a4 + w4j[q]);
            }
            let c = &mut diag[0];
            *c = rf * pf.mode[p] * (*c + c1 * SQRT_2 * a1) + c23 * ph.mode[p] * SQRT_2 * a23 + c4 * SQRT_2 * a4;
        });

        if (step + 1) % check_every == 0 || step + 1 == steps {
            let norm: f64 = y.iter().map(|x| x.norm_sqr()).sum();
            let drift = (norm - norm0).abs();
            if !(drift <= opts.norm_tolerance) {
                return Err(Error::Convergence {
                    what: format!(
                        "oracle norm at t = {:.4} (step {}, dt = {h:.4e}); reduce dt",
                        state.t + (step + 1) as f64 * h,
                        step + 1
                    ),
                    achieved: drift,
                    tolerance: opts.norm_tolerance,
                });
            }
        }
    }
    Ok(OracleState {
        data: y,
        t: opts.t_final,
        ..state.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bath::BathGrid;
    use crate::oracle::state::initialize;
    use crate::params::{ModelParams, WavepacketParams};

    fn opts(t_final: f64, dt: f64) -> EvolveOptions {
        EvolveOptions {
            t_final,
            dt,
            norm_tolerance: 1e-8,
            check_every: 10,
        }
    }

    #[test]
    fn decoupled_is_free_rotation() {
        // γ_c → tiny: the bath coupling vanishes to rounding
        let p = ModelParams::new(0.3, 0.02, 1e-300).unwrap();
        let table = FcTable::new(&p, 4).unwrap();
        let wp = WavepacketParams::new(0.1, -0.1, 0.05).unwrap();
        let bath = BathGrid::new(41, 1.0).unwrap();
        let s0 = initialize(&wp, 0, 3, &bath, 0.5).unwrap();
        let s1 = evolve(&s0, &table, &opts(7.3, 0.1), Execution::Parallel).unwrap();
        for (p_, q) in [(0, 0), (20, 3), (40, 39)] {
            assert!((s1.c(0, p_, q).norm() - s0.c(0, p_, q).norm()).abs() < 1e-14);
            let w = bath.detuning(p_) + bath.detuning(q);
            let want = s0.c(0, p_, q) * Complex64::from_polar(1.0, -w * 7.3);
            assert!((s1.c(0, p_, q) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn norm_conserved_and_strategies_agree() {
        let p = ModelParams::new(0.3, 0.05, 0.3).unwrap();
        let table = FcTable::new(&p, 4).unwrap();
        let wp = WavepacketParams::new(0.0, 0.0, 0.1).unwrap();
        let bath = BathGrid::new(61, 3.0).unwrap();
        let s0 = initialize(&wp, 0, 4, &bath, 0.5).unwrap();
        let dt = default_dt(&s0, &table).unwrap();
        let a = evolve(&s0, &table, &opts(20.0, dt), Execution::Parallel).unwrap();
        let b = evolve(&s0, &table, &opts(20.0, dt), Execution::Sequential).unwrap();
        assert_eq!(a.data, b.data);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-8);
        assert!(a.intracavity() > 0.0);
    }

    #[test]
    fn drift_is_reported() {
        let p = ModelParams::new(0.3, 0.05, 0.3).unwrap();
        let table = FcTable::new(&p, 4).unwrap();
        let wp = WavepacketParams::new(0.0, 0.0, 0.1).unwrap();
        let bath = BathGrid::new(31, 3.0).unwrap();
        let s0 = initialize(&wp, 0, 4, &bath, 0.5).unwrap();
        let bad = EvolveOptions {
            norm_tolerance: 1e-8,
            ..opts(20.0, 2.0)
        };
        assert!(matches!(
            evolve(&s0, &table, &bad, Execution::Sequential),
            Err(Error::Convergence { .. })
        ));
    }
}
