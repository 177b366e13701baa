use num_complex::Complex64;
use serde::Serialize;

use super::overlap::{fc_overlap, MAX_FOCK_INDEX};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::params::{ModelParams, MAX_PHOTONS};

const SECTORS: usize = MAX_PHOTONS + 1;

/// Cached `⟨j̃(m)|s̃(n)⟩` for `m, n ≤ 2` and `j, s ≤ max_index`.
///
/// Immutable once built; shared by reference across spectrum sweeps.
#[derive(Debug, Clone)]
pub struct FcTable {
    params: ModelParams,
    max_index: usize,
    // blocks[m * SECTORS + n][j * dim + s]
    blocks: Vec<Vec<Complex64>>,
}

/// One tabulated overlap, as written to CSV.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FcEntry {
    pub m: usize,
    pub j: usize,
    pub n: usize,
    pub s: usize,
    pub re: f64,
    pub im: f64,
}

impl FcTable {
    pub fn new(params: &ModelParams, max_index: usize) -> Result<Self> {
        Self::build(params, max_index, Execution::default())
    }

    pub fn build(params: &ModelParams, max_index: usize, exec: Execution) -> Result<Self> {
        params.validate()?;
        if max_index > MAX_FOCK_INDEX {
            return Err(Error::Range {
                what: "FC table size",
                index: max_index,
                max: MAX_FOCK_INDEX,
            });
        }
        let dim = max_index + 1;
        let blocks = exec.map_indices(SECTORS * SECTORS, |key| -> Result<Vec<Complex64>> {
            let (m, n) = (key / SECTORS, key % SECTORS);
            let mut block = vec![Complex64::new(0.0, 0.0); dim * dim];
            if m == n {
                for j in 0..dim {
                    block[j * dim + j] = Complex64::new(1.0, 0.0);
                }
                return Ok(block);
            }
            for j in 0..dim {
                for s in 0..dim {
                    block[j * dim + s] = fc_overlap(m, j, n, s, params)?;
                }
            }
            Ok(block)
        });
        let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(FcTable {
            params: *params,
            max_index,
            blocks,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    /// `⟨j̃(m)|s̃(n)⟩`. Panics if an index is outside the table.
    #[inline]
    pub fn get(&self, m: usize, j: usize, n: usize, s: usize) -> Complex64 {
        let dim = self.max_index + 1;
        debug_assert!(j < dim && s < dim);
        self.blocks[m * SECTORS + n][j * dim + s]
    }

    /// Checked variant of [`FcTable::get`].
    pub fn try_get(&self, m: usize, j: usize, n: usize, s: usize) -> Result<Complex64> {
        if m > MAX_PHOTONS || n > MAX_PHOTONS {
            return Err(Error::Range {
                what: "photon number",
                index: m.max(n),
                max: MAX_PHOTONS,
            });
        }
        let worst = j.max(s);
        if worst > self.max_index {
            return Err(Error::Range {
                what: "FC table index",
                index: worst,
                max: self.max_index,
            });
        }
        Ok(self.get(m, j, n, s))
    }

    /// `Σ_s |⟨j̃(m)|s̃(n)⟩|²` over the tabulated range.
    pub fn completeness(&self, m: usize, j: usize, n: usize) -> f64 {
        (0..=self.max_index).map(|s| self.get(m, j, n, s).norm_sqr()).sum()
    }

    /// All entries in `(m, j, n, s)` lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = FcEntry> + '_ {
        let dim = self.max_index + 1;
        (0..SECTORS).flat_map(move |m| {
            (0..dim).flat_map(move |j| {
                (0..SECTORS).flat_map(move |n| {
                    (0..dim).map(move |s| {
                        let v = self.get(m, j, n, s);
                        FcEntry {
                            m,
                            j,
                            n,
                            s,
                            re: v.re,
                            im: v.im,
                        }
                    })
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_evaluation() {
        let p = ModelParams::new(0.4, 0.05, 0.1).unwrap();
        let t = FcTable::new(&p, 8).unwrap();
        for (m, n) in [(0, 1), (1, 2), (2, 0), (1, 1)] {
            for j in 0..=8 {
                for s in 0..=8 {
                    assert_eq!(t.get(m, j, n, s), fc_overlap(m, j, n, s, &p).unwrap());
                }
            }
        }
        assert!(t.try_get(0, 9, 1, 0).is_err());
        assert!(t.try_get(3, 0, 1, 0).is_err());
    }

    #[test]
    fn sequential_and_parallel_builds_agree() {
        let p = ModelParams::new(0.8, 0.1, 0.02).unwrap();
        let a = FcTable::build(&p, 10, Execution::Sequential).unwrap();
        let b = FcTable::build(&p, 10, Execution::Parallel).unwrap();
        assert!(a.entries().zip(b.entries()).all(|(x, y)| x.re == y.re && x.im == y.im));
        assert_eq!(a.entries().count(), 9 * 11 * 11);
    }

    #[test]
    fn completeness_close_to_one() {
        let p = ModelParams::new(0.8, 0.1, 0.02).unwrap();
        let t = FcTable::new(&p, 60).unwrap();
        for j in 0..=10 {
            assert!(t.completeness(0, j, 2) > 1.0 - 1e-6);
            assert!(t.completeness(1, j, 1) > 1.0 - 1e-15);
        }
    }
}
