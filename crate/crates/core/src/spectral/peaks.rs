//! Local-maximum finding and the structural metrics used to compare
//! computed spectra against qualitative features (single peak, phonon
//! sidebands, subpeaks, anti-diagonal ridges).
//!
//! A sample is a local maximum when it is strictly greater than every
//! neighbour (2 in 1-D, 8 in 2-D). A connected run of equal samples whose
//! outer neighbours are all strictly lower counts once, at its centroid.
//! Samples on the boundary are never maxima: a peak must be bracketed to be
//! resolved.

use serde::Serialize;

use super::spectrum::{DiagonalCut, SpectrumGrid};

/// Maximum of a 1-D cut. `position` is refined by a parabola through the
/// sample and its neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak1 {
    pub index: usize,
    pub position: f64,
    pub value: f64,
}

/// Maximum of a 2-D grid, refined separately along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak2 {
    pub ip: usize,
    pub iq: usize,
    pub p: f64,
    pub q: f64,
    pub value: f64,
}

/// Vertex of the parabola through three equally weighted samples.
/// Falls back to the middle sample when the points are not concave.
pub fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < 0.0) {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    let yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
    (xv, yv.max(y1))
}

pub fn local_maxima_1d(axis: &[f64], values: &[f64]) -> Vec<Peak1> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let v = values[i];
        if !(v > values[i - 1]) {
            i += 1;
            continue;
        }
        let mut end = i;
        while end + 1 < n && values[end + 1] == v {
            end += 1;
        }
        if end + 1 < n && values[end + 1] < v {
            if end == i {
                let (position, value) = parabolic_vertex(
                    [axis[i - 1], axis[i], axis[i + 1]],
                    [values[i - 1], v, values[i + 1]],
                );
                out.push(Peak1 {
                    index: i,
                    position,
                    value,
                });
            } else {
                out.push(Peak1 {
                    index: (i + end) / 2,
                    position: 0.5 * (axis[i] + axis[end]),
                    value: v,
                });
            }
        }
        i = end + 1;
    }
    out
}

fn refine_axis(axis: &[f64], line: impl Fn(usize) -> f64, i: usize) -> f64 {
    if i == 0 || i + 1 >= axis.len() {
        return axis[i];
    }
    parabolic_vertex(
        [axis[i - 1], axis[i], axis[i + 1]],
        [line(i - 1), line(i), line(i + 1)],
    )
    .0
}

pub fn local_maxima_2d(grid: &SpectrumGrid) -> Vec<Peak2> {
    let (np, nq) = grid.shape();
    let v = |i: usize, k: usize| grid.values[i * nq + k];
    let mut seen = vec![false; np * nq];
    let mut out = Vec::new();
    for i in 1..np.saturating_sub(1) {
        for k in 1..nq.saturating_sub(1) {
            if seen[i * nq + k] {
                continue;
            }
            let x = v(i, k);
            let mut plateau = false;
            let mut dominated = false;
            for (a, b) in neighbours(i, k, np, nq) {
                let y = v(a, b);
                if y > x {
                    dominated = true;
                    break;
                }
                plateau |= y == x;
            }
            if dominated {
                continue;
            }
            if !plateau {
                out.push(Peak2 {
                    ip: i,
                    iq: k,
                    p: refine_axis(&grid.p_axis, |a| v(a, k), i),
                    q: refine_axis(&grid.q_axis, |b| v(i, b), k),
                    value: x,
                });
                continue;
            }
            // flood-fill the plateau
            let mut stack = vec![(i, k)];
            let mut members = Vec::new();
            let mut is_max = true;
            seen[i * nq + k] = true;
            while let Some((a, b)) = stack.pop() {
                members.push((a, b));
                if a == 0 || b == 0 || a + 1 == np || b + 1 == nq {
                    is_max = false;
                }
                for (c, d) in neighbours(a, b, np, nq) {
                    let y = v(c, d);
                    if y > x {
                        is_max = false;
                    } else if y == x && !seen[c * nq + d] {
                        seen[c * nq + d] = true;
                        stack.push((c, d));
                    }
                }
            }
            if is_max {
                let m = members.len() as f64;
                let p = members.iter().map(|&(a, _)| grid.p_axis[a]).sum::<f64>() / m;
                let q = members.iter().map(|&(_, b)| grid.q_axis[b]).sum::<f64>() / m;
                let &(ip, iq) = members
                    .iter()
                    .min_by(|x, y| {
                        let dx = (grid.p_axis[x.0] - p).hypot(grid.q_axis[x.1] - q);
                        let dy = (grid.p_axis[y.0] - p).hypot(grid.q_axis[y.1] - q);
                        dx.total_cmp(&dy)
                    })
                    .unwrap();
                out.push(Peak2 {
                    ip,
                    iq,
                    p,
                    q,
                    value: x,
                });
            }
        }
    }
    out
}

fn neighbours(i: usize, k: usize, np: usize, nq: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1i64..=1)
        .flat_map(|di| (-1i64..=1).map(move |dk| (di, dk)))
        .filter(|&d| d != (0, 0))
        .filter_map(move |(di, dk)| {
            let a = i as i64 + di;
            let b = k as i64 + dk;
            (a >= 0 && b >= 0 && (a as usize) < np && (b as usize) < nq).then_some((a as usize, b as usize))
        })
}

/// Peaks at or above `fraction` of `global_max`.
pub fn significant<P: Copy>(peaks: &[P], value: impl Fn(&P) -> f64, global_max: f64, fraction: f64) -> Vec<P> {
    peaks
        .iter()
        .copied()
        .filter(|p| value(p) >= fraction * global_max)
        .collect()
}

/// Whether a 2-D spectrum has a single dominant peak.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub global_max: f64,
    pub peaks_above_threshold: Vec<Peak2>,
    pub threshold_fraction: f64,
}

impl DominanceReport {
    pub fn single_peak(&self) -> bool {
        self.peaks_above_threshold.len() == 1
    }
}

pub fn dominance(grid: &SpectrumGrid, fraction: f64) -> DominanceReport {
    let global_max = grid.max();
    let peaks = local_maxima_2d(grid);
    DominanceReport {
        global_max,
        peaks_above_threshold: significant(&peaks, |p| p.value, global_max, fraction),
        threshold_fraction: fraction,
    }
}

/// Phonon-sideband resolution on a diagonal cut: some pair of significant
/// maxima separated by roughly one (possibly squeezed) phonon energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidebandReport {
    pub peaks: Vec<Peak1>,
    pub window: (f64, f64),
    pub pairs: Vec<(f64, f64)>,
}

impl SidebandReport {
    pub fn resolved(&self) -> bool {
        !self.pairs.is_empty()
    }
}

/// Looks for pairs of maxima above `fraction` of the cut maximum whose
/// separation lies in `[0.9 ω_M, 1.1 ω_M e^{2 r_2}]`.
pub fn sidebands(cut: &DiagonalCut, omega_m: f64, r2: f64, fraction: f64) -> SidebandReport {
    let max = cut.values.iter().copied().fold(0.0, f64::max);
    let peaks = significant(&local_maxima_1d(&cut.axis, &cut.values), |p| p.value, max, fraction);
    let window = (0.9 * omega_m, 1.1 * omega_m * (2.0 * r2).exp());
    let mut pairs = Vec::new();
    for (a, pa) in peaks.iter().enumerate() {
        for pb in &peaks[a + 1..] {
            let d = (pb.position - pa.position).abs();
            if d >= window.0 && d <= window.1 {
                pairs.push((pa.position, pb.position));
            }
        }
    }
    SidebandReport {
        peaks,
        window,
        pairs,
    }
}

/// Fine structure inside sidebands: adjacent significant maxima separated
/// by about `ω_M (e^{2r_1} − 1)` with a real dip between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubpeakReport {
    pub spacing: f64,
    pub window: (f64, f64),
    pub max_dip_ratio: f64,
    /// `(left, right, dip_ratio)` for every qualifying adjacent pair.
    pub pairs: Vec<(f64, f64, f64)>,
}

impl SubpeakReport {
    pub fn resolved(&self) -> bool {
        !self.pairs.is_empty()
    }
}

pub const SUBPEAK_DIP_RATIO: f64 = 0.8;

pub fn subpeaks(cut: &DiagonalCut, omega_m: f64, r1: f64, fraction: f64) -> SubpeakReport {
    let spacing = omega_m * ((2.0 * r1).exp() - 1.0);
    let window = (0.6 * spacing, 1.4 * spacing);
    let max = cut.values.iter().copied().fold(0.0, f64::max);
    let peaks = significant(&local_maxima_1d(&cut.axis, &cut.values), |p| p.value, max, fraction);
    let mut pairs = Vec::new();
    for w in peaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let d = b.position - a.position;
        if d < window.0 || d > window.1 {
            continue;
        }
        let floor = cut.values[a.index..=b.index]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let ratio = floor / a.value.min(b.value);
        if ratio < SUBPEAK_DIP_RATIO {
            pairs.push((a.position, b.position, ratio));
        }
    }
    SubpeakReport {
        spacing,
        window,
        max_dip_ratio: SUBPEAK_DIP_RATIO,
        pairs,
    }
}

/// Location and shape of the global maximum of a grid with identical,
/// uniformly spaced axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RidgeReport {
    pub p: f64,
    pub q: f64,
    pub value: f64,
    /// `Δp + Δq` at the maximum.
    pub sum: f64,
    /// Full width at half maximum along the anti-diagonal `(1, −1)`.
    pub width_along: f64,
    /// Full width at half maximum along the diagonal `(1, 1)`.
    pub width_across: f64,
}

impl RidgeReport {
    pub fn elongation(&self) -> f64 {
        self.width_along / self.width_across
    }
}

fn half_width(grid: &SpectrumGrid, i: usize, k: usize, di: i64, dk: i64, step: f64) -> f64 {
    let (np, nq) = grid.shape();
    let half = 0.5 * grid.get(i, k);
    let mut prev = grid.get(i, k);
    let (mut a, mut b) = (i as i64, k as i64);
    let mut n = 0.0;
    loop {
        a += di;
        b += dk;
        if a < 0 || b < 0 || a as usize >= np || b as usize >= nq {
            return n * step;
        }
        let y = grid.get(a as usize, b as usize);
        if y < half {
            // linear interpolation of the crossing
            return (n + (prev - half) / (prev - y)) * step;
        }
        prev = y;
        n += 1.0;
    }
}

pub fn ridge(grid: &SpectrumGrid) -> Option<RidgeReport> {
    let (np, nq) = grid.shape();
    if np < 3 || nq < 3 || grid.p_axis != grid.q_axis {
        return None;
    }
    let (idx, &value) = grid
        .values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let (i, k) = (idx / nq, idx % nq);
    let dx = (grid.p_axis[np - 1] - grid.p_axis[0]) / (np - 1) as f64;
    let step = dx * std::f64::consts::SQRT_2;
    let p = refine_axis(&grid.p_axis, |a| grid.get(a, k), i);
    let q = refine_axis(&grid.q_axis, |b| grid.get(i, b), k);
    let along = half_width(grid, i, k, 1, -1, step) + half_width(grid, i, k, -1, 1, step);
    let across = half_width(grid, i, k, 1, 1, step) + half_width(grid, i, k, -1, -1, step);
    Some(RidgeReport {
        p,
        q,
        value,
        sum: p + q,
        width_along: along,
        width_across: across,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{MechanicalInitState, ModelParams, WavepacketParams};
    use crate::spectral::spectrum::{SpectrumMeta, TruncationRecord};
    use crate::spectral::Truncation;

    fn meta() -> SpectrumMeta {
        SpectrumMeta {
            source: "test".into(),
            model: ModelParams::new(0.1, 0.0, 0.1).unwrap(),
            wavepacket: WavepacketParams::new(0.0, 0.0, 0.1).unwrap(),
            state: MechanicalInitState::ground(),
            truncation: TruncationRecord::unchecked(Truncation::default()),
            notes: vec![],
        }
    }

    fn grid(axis: &[f64], f: impl Fn(f64, f64) -> f64) -> SpectrumGrid {
        let values = axis
            .iter()
            .flat_map(|&p| axis.iter().map(move |&q| (p, q)))
            .map(|(p, q)| f(p, q))
            .collect();
        SpectrumGrid {
            p_axis: axis.to_vec(),
            q_axis: axis.to_vec(),
            values,
            meta: meta(),
        }
    }

    #[test]
    fn parabola_vertex_exact() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.13) * (x - 0.13);
        let (xv, yv) = parabolic_vertex([0.0, 0.1, 0.2], [f(0.0), f(0.1), f(0.2)]);
        assert!((xv - 0.13).abs() < 1e-12);
        assert!((yv - 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_d_maxima_and_plateaus() {
        let axis: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let v = [0.0, 1.0, 0.0, 2.0, 2.0, 2.0, 1.0, 3.0, 4.0];
        let peaks = local_maxima_1d(&axis, &v);
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[0].index, 1);
        assert_eq!(peaks[1].position, 4.0);
        // shoulder, not a plateau maximum
        assert!(local_maxima_1d(&axis[..4], &[0.0, 1.0, 1.0, 2.0]).is_empty());
    }

    #[test]
    fn two_d_single_gaussian() {
        let axis: Vec<f64> = (0..41).map(|i| -1.0 + 0.05 * i as f64).collect();
        let g = grid(&axis, |p, q| (-((p - 0.12).powi(2) + (q + 0.31).powi(2)) / 0.02).exp());
        let peaks = local_maxima_2d(&g);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].p - 0.12).abs() < 5e-3);
        assert!((peaks[0].q + 0.31).abs() < 5e-3);
        assert!(dominance(&g, 0.1).single_peak());
    }

    #[test]
    fn two_d_plateau_centroid() {
        let axis: Vec<f64> = (0..7).map(|i| i as f64).collect();
        let g = grid(&axis, |p, q| {
            if (2.0..=3.0).contains(&p) && q == 3.0 {
                1.0
            } else {
                0.0
            }
        });
        let peaks = local_maxima_2d(&g);
        assert_eq!(peaks.len(), 1);
        assert_eq!((peaks[0].p, peaks[0].q), (2.5, 3.0));
    }

    #[test]
    fn ridge_shape() {
        let axis: Vec<f64> = (0..81).map(|i| -1.0 + 0.025 * i as f64).collect();
        // narrow in the sum, wide in the difference
        let g = grid(&axis, |p, q| {
            let s = p + q + 0.4;
            let d = p - q;
            1.0 / (1.0 + (s / 0.05).powi(2)) / (1.0 + (d / 0.5).powi(2))
        });
        let r = ridge(&g).unwrap();
        assert!((r.sum + 0.4).abs() < 0.03);
        assert!(r.elongation() > 5.0);
    }

    #[test]
    fn subpeak_detection() {
        let axis: Vec<f64> = (0..601).map(|i| -1.0 + i as f64 / 300.0).collect();
        let lor = |x: f64, c: f64| 1.0 / (1.0 + ((x - c) / 0.01).powi(2));
        let values: Vec<f64> = axis.iter().map(|&x| lor(x, 0.0) + lor(x, 0.1)).collect();
        let cut = DiagonalCut {
            axis: axis.clone(),
            values,
            meta: meta(),
        };
        let r1 = (1.1f64).ln() / 2.0; // e^{2r1} − 1 = 0.1
        assert!(subpeaks(&cut, 1.0, r1, 0.05).resolved());
        assert!(!sidebands(&cut, 1.0, 0.0, 0.05).resolved());
    }
}
