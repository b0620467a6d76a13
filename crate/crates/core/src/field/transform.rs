use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::lattice::TorusLattice;
use crate::error::{Error, Result};

/// Unnormalized 3D DFT on a cubic grid of side `G`, row-major with `z` fastest.
///
/// `forward` uses `e^{-2πi k·j/G}`, `inverse` uses `e^{+2πi k·j/G}`; neither scales.
#[derive(Clone)]
pub struct GridTransform {
    side: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform")
            .field("side", &self.side)
            .finish()
    }
}

impl GridTransform {
    pub fn new(side: usize) -> Self {
        assert!(side > 0, "grid side must be positive");
        let mut planner = FftPlanner::new();
        Self {
            side,
            forward: planner.plan_fft_forward(side),
            inverse: planner.plan_fft_inverse(side),
        }
    }

    /// Grid of side `factor·(2M+1)` for `lattice`.
    pub fn for_lattice(lattice: &TorusLattice, factor: usize) -> Result<Self> {
        let side = factor * lattice.side();
        if side < lattice.side() {
            return Err(Error::GridTooSmall {
                side,
                cutoff: lattice.cutoff(),
                required: lattice.side(),
            });
        }
        Ok(Self::new(side))
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.side.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(&*self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(&*self.inverse, data);
    }

    fn apply(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let g = self.side;
        assert_eq!(data.len(), g * g * g);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // z lines are contiguous.
        fft.process_with_scratch(data, &mut scratch);

        // y lines: transpose each x-slab so y becomes contiguous.
        let mut slab = vec![Complex64::default(); g * g];
        for ix in 0..g {
            let base = ix * g * g;
            for iy in 0..g {
                for iz in 0..g {
                    slab[iz * g + iy] = data[base + iy * g + iz];
                }
            }
            fft.process_with_scratch(&mut slab, &mut scratch);
            for iy in 0..g {
                for iz in 0..g {
                    data[base + iy * g + iz] = slab[iz * g + iy];
                }
            }
        }

        // x lines: gather every (y, z) column into a contiguous batch.
        let mut batch = vec![Complex64::default(); g * g * g];
        for ix in 0..g {
            for yz in 0..g * g {
                batch[yz * g + ix] = data[ix * g * g + yz];
            }
        }
        fft.process_with_scratch(&mut batch, &mut scratch);
        for ix in 0..g {
            for yz in 0..g * g {
                data[ix * g * g + yz] = batch[yz * g + ix];
            }
        }
    }

    /// Grid index of each lattice mode (negative components wrap around).
    pub fn embedding(&self, lattice: &TorusLattice) -> Result<Vec<usize>> {
        if self.side < lattice.side() {
            return Err(Error::GridTooSmall {
                side: self.side,
                cutoff: lattice.cutoff(),
                required: lattice.side(),
            });
        }
        let g = self.side as i64;
        let wrap = |c: i64| c.rem_euclid(g) as usize;
        Ok(lattice
            .modes()
            .map(|n| (wrap(n[0]) * self.side + wrap(n[1])) * self.side + wrap(n[2]))
            .collect())
    }

    /// Zero grid with `coeffs` placed at their wrapped positions.
    pub fn scatter(&self, embedding: &[usize], coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut grid = vec![Complex64::default(); self.len()];
        for (&pos, &c) in embedding.iter().zip(coeffs) {
            grid[pos] = c;
        }
        grid
    }

    pub fn gather(&self, embedding: &[usize], grid: &[Complex64]) -> Vec<Complex64> {
        embedding.iter().map(|&pos| grid[pos]).collect()
    }
}
