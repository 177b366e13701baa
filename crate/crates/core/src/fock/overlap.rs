use num_complex::Complex64;
use std::sync::OnceLock;

use super::hermite::scaled_hermite_table;
use super::squeeze::{displacement, squeeze_factor};
use crate::error::{Error, Result};
use crate::params::{ModelParams, MAX_PHOTONS};

/// Largest Fock index accepted by the closed-form overlap.
pub const MAX_FOCK_INDEX: usize = 150;

/// Below this squeeze magnitude the displaced-number-state branch is used.
pub const SMALL_SQUEEZE: f64 = 1e-8;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(2 * MAX_FOCK_INDEX + 2);
        t.push(0.0);
        for n in 1..=2 * MAX_FOCK_INDEX + 1 {
            t.push(t[n - 1] + (n as f64).ln());
        }
        t
    })
}

fn check_index(what: &'static str, index: usize) -> Result<()> {
    if index > MAX_FOCK_INDEX {
        return Err(Error::Range {
            what,
            index,
            max: MAX_FOCK_INDEX,
        });
    }
    Ok(())
}

/// `⟨s| S(r) D(α) |j⟩` with `S(r) = exp[r(b² − b†²)/2]`, `D(α) = exp[α b† − α* b]`.
///
/// Uses the Hermite-polynomial closed form with `μ = cosh R`,
/// `ν = e^{−iθ} sinh R`. The fractional powers `(ν/2μ)^{s/2}`,
/// `(2μν)^{−k/2}`, `(−ν*/2μ)^{(j−k)/2}` are folded together with the Hermite
/// arguments into `c^n H_n(x/c)` products that only involve `c²`
/// (see [`scaled_hermite_table`]), which fixes the branch unambiguously and
/// keeps the sum well scaled for large indices.
pub fn overlap_closed_form(s: usize, j: usize, r: f64, alpha: Complex64) -> Result<Complex64> {
    check_index("bra index", s)?;
    check_index("ket index", j)?;
    if !(r.is_finite() && alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::Domain("overlap arguments must be finite".into()));
    }
    if r.abs() < SMALL_SQUEEZE {
        return Ok(displaced_number_overlap(s, j, alpha));
    }

    let mu = r.abs().cosh();
    let nu = Complex64::new(r.sinh(), 0.0);
    let two_mu = 2.0 * mu;
    // c1² = 2μν, c2² = −2μν*
    let c1_sq = two_mu * nu;
    let c2_sq = -two_mu * nu.conj();
    let beta = alpha * nu.conj() - alpha.conj() * mu;

    let h_s = scaled_hermite_table(s, alpha, c1_sq);
    let h_j = scaled_hermite_table(j, beta, c2_sq);

    let lf = ln_factorials();
    let ln_two_mu = two_mu.ln();
    let ln2 = std::f64::consts::LN_2;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=s.min(j) {
        // 2^k C(j,k) s!/(s−k)! / sqrt(s! j!) · (2μ)^{−(s + j − k)}
        let ln_coef = k as f64 * ln2 + 0.5 * (lf[s] + lf[j])
            - lf[k]
            - lf[j - k]
            - lf[s - k]
            - (s + j - k) as f64 * ln_two_mu;
        sum += ln_coef.exp() * h_s[s - k] * h_j[j - k];
    }
    let gauss = (-0.5 * alpha.norm_sqr() + nu.conj() * alpha * alpha / two_mu).exp();
    Ok(gauss * sum / mu.sqrt())
}

/// `⟨s| D(α) |j⟩` for a pure displacement.
pub fn displaced_number_overlap(s: usize, j: usize, alpha: Complex64) -> Complex64 {
    let lf = ln_factorials();
    let minus_conj = -alpha.conj();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=s.min(j) {
        let coef = (0.5 * (lf[s] + lf[j]) - lf[k] - lf[s - k] - lf[j - k]).exp();
        sum += coef * alpha.powu((s - k) as u32) * minus_conj.powu((j - k) as u32);
    }
    (-0.5 * alpha.norm_sqr()).exp() * sum
}

/// Effective squeeze and displacement taking the `n`-photon basis onto the
/// `m`-photon basis: `⟨j̃(m)|s̃(n)⟩ = ⟨j| S(r) D(α) |s⟩` with
/// `r = r_n − r_m` and `α = α_n − α_m e^{r_n − r_m}`.
pub fn relative_transform(m: usize, n: usize, params: &ModelParams) -> Result<(f64, f64)> {
    if m > MAX_PHOTONS || n > MAX_PHOTONS {
        return Err(Error::Range {
            what: "photon number",
            index: m.max(n),
            max: MAX_PHOTONS,
        });
    }
    let rm = squeeze_factor(m, params)?;
    let rn = squeeze_factor(n, params)?;
    let am = displacement(m, params)?;
    let an = displacement(n, params)?;
    let dr = rn - rm;
    Ok((dr, an - am * dr.exp()))
}

/// Generalized Franck–Condon factor `⟨j̃(m)|s̃(n)⟩`.
pub fn fc_overlap(m: usize, j: usize, n: usize, s: usize, params: &ModelParams) -> Result<Complex64> {
    let (r, alpha) = relative_transform(m, n, params)?;
    overlap_closed_form(j, s, r, Complex64::new(alpha, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_and_coherent() {
        assert_eq!(overlap_closed_form(0, 0, 0.0, c(0.0)).unwrap(), c(1.0));
        let v = overlap_closed_form(0, 0, 0.0, c(0.3)).unwrap();
        assert!((v.re - (-0.045f64).exp()).abs() < 1e-15);
        assert!((v.re - 0.955997).abs() < 1e-6);
        assert_eq!(overlap_closed_form(3, 1, 0.0, c(0.0)).unwrap(), c(0.0));
    }

    #[test]
    fn range_error() {
        assert!(matches!(
            overlap_closed_form(MAX_FOCK_INDEX + 1, 0, 0.1, c(0.0)),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn squeezed_vacuum_even_amplitudes() {
        // ⟨2n|S(r)|0⟩ = (−tanh r)^n sqrt((2n)!)/(2^n n!) / sqrt(cosh r)
        let r = 0.3f64;
        for n in 0..5usize {
            let got = overlap_closed_form(2 * n, 0, r, c(0.0)).unwrap();
            let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
            let want = (-r.tanh()).powi(n as i32) * fact(2 * n).sqrt()
                / (2f64.powi(n as i32) * fact(n))
                / r.cosh().sqrt();
            assert!((got.re - want).abs() < 1e-14, "n={n}: {got} vs {want}");
            let odd = overlap_closed_form(2 * n + 1, 0, r, c(0.0)).unwrap();
            assert!(odd.norm() < 1e-15);
        }
    }

    #[test]
    fn small_squeeze_branch_is_continuous() {
        let a = c(-0.4);
        for (s, j) in [(0, 0), (3, 1), (2, 5), (7, 7)] {
            let below = overlap_closed_form(s, j, 0.5 * SMALL_SQUEEZE, a).unwrap();
            let above = overlap_closed_form(s, j, 2.0 * SMALL_SQUEEZE, a).unwrap();
            assert!((below - above).norm() < 1e-6);
        }
    }

    #[test]
    fn equal_photon_number_is_identity() {
        let p = ModelParams::new(0.8, 0.1, 0.02).unwrap();
        for m in 0..=2 {
            for j in 0..6 {
                for s in 0..6 {
                    let v = fc_overlap(m, j, m, s, &p).unwrap();
                    let want = if j == s { 1.0 } else { 0.0 };
                    assert!((v - c(want)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn decoupled_is_identity() {
        let p = ModelParams::new(0.0, 0.0, 0.02).unwrap();
        for (m, n) in [(0, 1), (1, 2), (2, 0)] {
            for j in 0..5 {
                for s in 0..5 {
                    let v = fc_overlap(m, j, n, s, &p).unwrap();
                    assert_eq!(v, c(if j == s { 1.0 } else { 0.0 }));
                }
            }
        }
    }

    #[test]
    fn coherent_special_case() {
        let p = ModelParams::new(0.5, 0.0, 0.1).unwrap();
        let v = fc_overlap(0, 0, 1, 0, &p).unwrap();
        assert!((v.re - (-0.125f64).exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn conjugation_symmetry(g1 in 0.0f64..0.8, g2 in 0.0f64..0.1,
                                m in 0usize..3, n in 0usize..3, j in 0usize..12, s in 0usize..12) {
            let p = ModelParams::new(g1, g2, 0.1).unwrap();
            let a = fc_overlap(m, j, n, s, &p).unwrap();
            let b = fc_overlap(n, s, m, j, &p).unwrap();
            prop_assert!((a - b.conj()).norm() < 1e-12);
        }

        #[test]
        fn completeness_monotone(g1 in 0.0f64..0.8, g2 in 0.0f64..0.1, j in 0usize..8) {
            let p = ModelParams::new(g1, g2, 0.1).unwrap();
            let mut acc = 0.0;
            for s in 0..=60 {
                let prev = acc;
                acc += fc_overlap(0, j, 2, s, &p).unwrap().norm_sqr();
                prop_assert!(acc >= prev);
            }
            prop_assert!(acc > 1.0 - 1e-6 && acc < 1.0 + 1e-10);
        }
    }
}
