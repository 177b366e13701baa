//! Long-time two-photon scattering amplitudes.
//!
//! Every channel is built from the denominators
//!
//! ```text
//! M1(s)  = Δq − E′(1,s) + jω + iγ/2
//! M2     = Δq − Δ1 + (j − n0)ω + iε
//! M3     = Δp + Δq − Δ1 − Δ2 + (j − n0)ω + 2iε
//! M4(l)  = Δp + Δq − Δ1 − E′(1,l) + jω + i(ε + γ/2)
//! M5(s′) = Δq − Δ1 + (j − s′)ω + iε
//! M6(s′) = Δp + Δq + jω − E′(2,s′) + iγ
//! ```
//!
//! The triple sums of C3 and C4 factorize because M3 carries no summation
//! index, so each costs O(N²) instead of O(N³).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::eigen::EigenData;
use crate::error::{Error, Result};
use crate::fock::{FcTable, MAX_FOCK_INDEX};
use crate::params::{normalization_g, ModelParams, WavepacketParams};

/// The output phase `e^{−i(Δp+Δq+jω_M)t}` is replaced by this constant. It
/// depends only on `(j, Δp, Δq)`, never on `n0`, so it drops out of both the
/// pure-state and the mixed-state spectrum.
pub const OUTPUT_PHASE: Complex64 = Complex64::new(1.0, 0.0);

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Fock-space cutoffs for the amplitude sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Truncation {
    /// Largest final phonon number `j`.
    pub j_max: usize,
    /// Largest intermediate index `s, s′, l`.
    pub s_max: usize,
    /// Largest initial phonon number `n0`.
    pub n0_max: usize,
    /// Relative change tolerated when the cutoffs are doubled.
    pub tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            j_max: 12,
            s_max: 12,
            n0_max: 8,
            tolerance: 5e-3,
        }
    }
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::validation("truncation.tolerance", "must be finite and > 0"));
        }
        if self.table_size() > MAX_FOCK_INDEX {
            return Err(Error::validation(
                "truncation",
                format!("cutoffs exceed the supported Fock index {MAX_FOCK_INDEX}"),
            ));
        }
        Ok(())
    }

    /// Every cutoff doubled (`n → 2n + 1` so that zero cutoffs still grow).
    pub fn doubled(&self) -> Self {
        Truncation {
            j_max: 2 * self.j_max + 1,
            s_max: 2 * self.s_max + 1,
            n0_max: self.n0_max,
            tolerance: self.tolerance,
        }
    }

    /// All cutoffs set to `n` (the `--trunc` flag).
    pub fn uniform(n: usize, tolerance: f64) -> Self {
        Truncation {
            j_max: n,
            s_max: n,
            n0_max: Truncation::default().n0_max.min(n),
            tolerance,
        }
    }

    /// FC table extent needed by these cutoffs.
    pub fn table_size(&self) -> usize {
        self.j_max.max(self.s_max).max(self.n0_max)
    }
}

/// The four channels at one ordering of the output detunings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Channels {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    pub c4: Complex64,
}

impl Channels {
    pub fn sum(&self) -> Complex64 {
        self.c1 + self.c2 + self.c3 + self.c4
    }
}

/// Amplitude `C_{n0,j}(Δp, Δq)` split into channels.
///
/// `direct` holds the channels at `(Δp, Δq)`, `exchanged` the same channels
/// at `(Δq, Δp)`; C2–C4 already include their `Δ1 ↔ Δ2` partner.
/// `total = G · (direct.sum() + exchanged.sum())`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeBreakdown {
    pub n0: usize,
    pub j: usize,
    pub dp: f64,
    pub dq: f64,
    pub direct: Channels,
    pub exchanged: Channels,
    pub total: Complex64,
}

/// Amplitude evaluator for fixed system, wavepacket and cutoffs.
///
/// Holds the FC factors it needs as dense matrices so that the inner loops
/// are plain slice arithmetic.
#[derive(Debug, Clone)]
pub struct ScatteringModel {
    params: ModelParams,
    wp: WavepacketParams,
    trunc: Truncation,
    table: Arc<FcTable>,
    eigen: EigenData,
    g: f64,
    ns: usize,
    // u[a * ns + s] = ⟨a|s̃(1)⟩ for a ≤ table size, s ≤ s_max
    u: Vec<Complex64>,
    // v[s * ns + t] = ⟨s̃(1)|t̃(2)⟩
    v: Vec<Complex64>,
}

/// Per-thread scratch buffers for [`ScatteringModel::amplitudes_into`].
#[derive(Debug, Default)]
pub struct Scratch {
    a: Vec<Complex64>,
    x4: Vec<Complex64>,
    y4: Vec<Complex64>,
    inv_m4: Vec<Complex64>,
}

impl ScatteringModel {
    pub fn new(params: &ModelParams, wp: &WavepacketParams, trunc: Truncation) -> Result<Self> {
        trunc.validate()?;
        let table = Arc::new(FcTable::new(params, trunc.table_size())?);
        Self::with_table(wp, trunc, table)
    }

    /// Reuses an existing table; its extent must cover `trunc`.
    pub fn with_table(wp: &WavepacketParams, trunc: Truncation, table: Arc<FcTable>) -> Result<Self> {
        wp.validate()?;
        trunc.validate()?;
        if table.max_index() < trunc.table_size() {
            return Err(Error::Range {
                what: "FC table for requested truncation",
                index: trunc.table_size(),
                max: table.max_index(),
            });
        }
        let params = *table.params();
        let eigen = EigenData::new(&params, trunc.s_max)?;
        let ns = trunc.s_max + 1;
        let na = trunc.table_size() + 1;
        let mut u = Vec::with_capacity(na * ns);
        for a in 0..na {
            for s in 0..ns {
                u.push(table.get(0, a, 1, s));
            }
        }
        let mut v = Vec::with_capacity(ns * ns);
        for s in 0..ns {
            for t in 0..ns {
                v.push(table.get(1, s, 2, t));
            }
        }
        Ok(ScatteringModel {
            params,
            wp: *wp,
            trunc,
            table,
            eigen,
            g: normalization_g(wp),
            ns,
            u,
            v,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn wavepacket(&self) -> &WavepacketParams {
        &self.wp
    }

    pub fn truncation(&self) -> &Truncation {
        &self.trunc
    }

    pub fn table(&self) -> &Arc<FcTable> {
        &self.table
    }

    pub fn eigen(&self) -> &EigenData {
        &self.eigen
    }

    pub fn normalization(&self) -> f64 {
        self.g
    }

    /// Same system with new cutoffs; rebuilds the FC table only if it is
    /// too small.
    pub fn with_truncation(&self, trunc: Truncation) -> Result<Self> {
        let table = if self.table.max_index() >= trunc.table_size() {
            Arc::clone(&self.table)
        } else {
            Arc::new(FcTable::new(&self.params, trunc.table_size())?)
        };
        Self::with_table(&self.wp, trunc, table)
    }

    /// Same system and cutoffs with a different input wavepacket.
    pub fn with_wavepacket(&self, wp: &WavepacketParams) -> Result<Self> {
        Self::with_table(wp, self.trunc, Arc::clone(&self.table))
    }

    fn check_indices(&self, n0: usize, j: usize) -> Result<()> {
        if n0 > self.trunc.n0_max {
            return Err(Error::Range {
                what: "initial phonon number n0",
                index: n0,
                max: self.trunc.n0_max,
            });
        }
        if j > self.trunc.j_max {
            return Err(Error::Range {
                what: "final phonon number j",
                index: j,
                max: self.trunc.j_max,
            });
        }
        Ok(())
    }

    fn c1(&self, n0: usize, j: usize, p: f64, q: f64) -> Complex64 {
        if j != n0 {
            return Complex64::new(0.0, 0.0);
        }
        let eps = self.wp.epsilon;
        1.0 / (Complex64::new(p - self.wp.delta1, eps) * Complex64::new(q - self.wp.delta2, eps))
    }

    /// C2, C3, C4 at output ordering `(p, q)` for one assignment of the
    /// input detunings `(d1, d2)`.
    #[allow(clippy::too_many_arguments)]
    fn chains(
        &self,
        n0: usize,
        j: usize,
        p: f64,
        q: f64,
        d1: f64,
        d2: f64,
        scratch: &mut Scratch,
    ) -> (Complex64, Complex64, Complex64) {
        let ns = self.ns;
        let w = self.params.omega_m;
        let gam = self.params.gamma_c;
        let eps = self.wp.epsilon;
        let jw = j as f64 * w;
        let e1 = &self.eigen.e1;
        let e2 = &self.eigen.e2;
        let u_j = &self.u[j * ns..(j + 1) * ns];
        let u_n0 = &self.u[n0 * ns..(n0 + 1) * ns];

        // a[s] = ⟨j|s̃(1)⟩ / M1(s)
        scratch.a.clear();
        scratch
            .a
            .extend((0..ns).map(|s| u_j[s] / Complex64::new(q - e1[s] + jw, 0.5 * gam)));

        let m2 = Complex64::new(q - d1 + (j as f64 - n0 as f64) * w, eps);
        let outer = Complex64::new(p - d2, eps);
        let mut c2 = Complex64::new(0.0, 0.0);
        for s in 0..ns {
            c2 += scratch.a[s] * u_n0[s].conj();
        }
        let c2 = -I * gam * c2 / (m2 * outer);

        let m3 = Complex64::new(p + q - d1 - d2 + (j as f64 - n0 as f64) * w, 2.0 * eps);
        scratch.inv_m4.clear();
        scratch.inv_m4.extend((0..ns).map(|l| {
            u_n0[l].conj() / Complex64::new(p + q - d1 - e1[l] + jw, eps + 0.5 * gam)
        }));

        // C3: Σ_{s′} [Σ_s a_s ⟨s̃(1)|s′⟩] [Σ_l ⟨s′|l̃(1)⟩ ⟨l̃(1)|n0⟩/M4(l)] / M5(s′)
        let mut c3 = Complex64::new(0.0, 0.0);
        for sp in 0..ns {
            let row = &self.u[sp * ns..(sp + 1) * ns];
            let mut x = Complex64::new(0.0, 0.0);
            let mut y = Complex64::new(0.0, 0.0);
            for k in 0..ns {
                x += scratch.a[k] * row[k].conj();
                y += row[k] * scratch.inv_m4[k];
            }
            let m5 = Complex64::new(q - d1 + jw - sp as f64 * w, eps);
            c3 += x * y / m5;
        }
        let c3 = -gam * gam * c3 / m3;

        // C4: Σ_{s′} [Σ_s a_s ⟨s̃(1)|s̃′(2)⟩] [Σ_l ⟨s̃′(2)|l̃(1)⟩ ⟨l̃(1)|n0⟩/M4(l)] / M6(s′)
        scratch.y4.clear();
        scratch.y4.resize(ns, Complex64::new(0.0, 0.0));
        for l in 0..ns {
            let row = &self.v[l * ns..(l + 1) * ns];
            let f = scratch.inv_m4[l];
            for (y, vl) in scratch.y4.iter_mut().zip(row) {
                *y += vl.conj() * f;
            }
        }
        scratch.x4.clear();
        scratch.x4.resize(ns, Complex64::new(0.0, 0.0));
        for s in 0..ns {
            let row = &self.v[s * ns..(s + 1) * ns];
            let a = scratch.a[s];
            for (x, vs) in scratch.x4.iter_mut().zip(row) {
                *x += a * vs;
            }
        }
        let mut c4 = Complex64::new(0.0, 0.0);
        for sp in 0..ns {
            let m6 = Complex64::new(p + q + jw - e2[sp], gam);
            c4 += scratch.x4[sp] * scratch.y4[sp] / m6;
        }
        let c4 = -2.0 * gam * gam * c4 / m3;
        (c2, c3, c4)
    }

    fn channels(&self, n0: usize, j: usize, p: f64, q: f64, scratch: &mut Scratch) -> Channels {
        let (d1, d2) = (self.wp.delta1, self.wp.delta2);
        let a = self.chains(n0, j, p, q, d1, d2, scratch);
        let b = self.chains(n0, j, p, q, d2, d1, scratch);
        Channels {
            c1: self.c1(n0, j, p, q),
            c2: a.0 + b.0,
            c3: a.1 + b.1,
            c4: a.2 + b.2,
        }
    }

    /// Channel-resolved amplitude at one point.
    pub fn breakdown(&self, n0: usize, j: usize, dp: f64, dq: f64) -> Result<AmplitudeBreakdown> {
        self.check_indices(n0, j)?;
        check_finite(dp, dq)?;
        let mut scratch = Scratch::default();
        let direct = self.channels(n0, j, dp, dq, &mut scratch);
        let exchanged = self.channels(n0, j, dq, dp, &mut scratch);
        Ok(AmplitudeBreakdown {
            n0,
            j,
            dp,
            dq,
            direct,
            exchanged,
            total: OUTPUT_PHASE * self.g * (direct.sum() + exchanged.sum()),
        })
    }

    /// Total amplitude `C_{n0,j}(Δp, Δq)`.
    pub fn total(&self, n0: usize, j: usize, dp: f64, dq: f64) -> Result<Complex64> {
        Ok(self.breakdown(n0, j, dp, dq)?.total)
    }

    /// Writes `C_{n0,j}(Δp, Δq)` for `j = 0..=j_max` into `out`.
    ///
    /// Indices must already be validated; this is the grid hot path.
    pub(crate) fn amplitudes_into(
        &self,
        n0: usize,
        dp: f64,
        dq: f64,
        out: &mut [Complex64],
        scratch: &mut Scratch,
    ) {
        for (j, slot) in out.iter_mut().enumerate().take(self.trunc.j_max + 1) {
            let s = self.channels(n0, j, dp, dq, scratch).sum()
                + self.channels(n0, j, dq, dp, scratch).sum();
            *slot = OUTPUT_PHASE * self.g * s;
        }
    }
}

pub(crate) fn check_finite(dp: f64, dq: f64) -> Result<()> {
    if !(dp.is_finite() && dq.is_finite()) {
        return Err(Error::Domain(format!("non-finite detuning ({dp}, {dq})")));
    }
    Ok(())
}
