use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{autocorrelation_direct, GridTransform, SpectralState, TorusLattice};
use crate::potential::PotentialModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RhsMethod {
    /// Explicit double sum over the difference lattice.
    Direct,
    /// Pseudospectral on the physical grid.
    #[default]
    Fft,
}

/// The momentum-space Hartree equation on one lattice:
/// `i α'(n) = (4π²|n|²/L²) α(n) + Σ_k α(n−k) V̂(2πk/L) β(k)`.
///
/// Holds the sampled potential and a grid transform; build once per run.
#[derive(Clone, Debug)]
pub struct HartreeSystem {
    lattice: TorusLattice,
    b: f64,
    kinetic: Vec<f64>,
    /// `V̂(2πk/L)` on the difference lattice.
    interaction: Vec<f64>,
    grid: GridTransform,
    embedding: Vec<usize>,
    /// `V̂` placed at the grid frequencies it multiplies, divided by `G³`.
    multiplier: Vec<f64>,
    dealias: bool,
}

impl HartreeSystem {
    /// With `dealias` the grid has side `2(2M+1)` and the nonlinear term is exact
    /// on the truncation; without it the side is `2M+1` and products alias.
    pub fn new(potential: &PotentialModel, lattice: TorusLattice, dealias: bool) -> Result<Self> {
        let diff = lattice.difference();
        let interaction = potential.lattice_samples(&diff)?;
        let grid = GridTransform::new(if dealias {
            2 * lattice.side()
        } else {
            lattice.side()
        });
        let embedding = grid.embedding(&lattice)?;
        let scale = 1.0 / grid.len() as f64;
        let mut multiplier = vec![0.0; grid.len()];
        let reach = if dealias { &diff } else { &lattice };
        for (pos, k) in grid.embedding(reach)?.into_iter().zip(reach.modes()) {
            let i = diff
                .index(k)
                .expect("reach is inside the difference lattice");
            multiplier[pos] = interaction[i] * scale;
        }
        Ok(Self {
            lattice,
            b: potential.b(),
            kinetic: lattice.kinetic_symbols(),
            interaction,
            grid,
            embedding,
            multiplier,
            dealias,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    /// `V̂(2πk/L)` on the difference lattice, storage order.
    pub fn interaction(&self) -> &[f64] {
        &self.interaction
    }

    /// Points of the real-space grid.
    pub fn grid_side(&self) -> usize {
        self.grid.side()
    }

    /// `φ(x) = Σ_n c_n e^{2πi n·x/L}` on the grid.
    pub(crate) fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = self.grid.scatter(&self.embedding, coeffs);
        self.grid.inverse(&mut data);
        data
    }

    /// Projection of grid values back onto the lattice.
    pub(crate) fn analyze(&self, mut data: Vec<Complex64>) -> Vec<Complex64> {
        self.grid.forward(&mut data);
        let scale = 1.0 / self.grid.len() as f64;
        self.embedding.iter().map(|&p| data[p] * scale).collect()
    }

    /// Mean field `W = (V_L ∗ |φ|²)` on the grid, from the synthesized field.
    pub(crate) fn mean_field_from(&self, field: &[Complex64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = field
            .iter()
            .map(|v| Complex64::new(v.norm_sqr(), 0.0))
            .collect();
        self.grid.forward(&mut data);
        data.iter_mut()
            .zip(&self.multiplier)
            .for_each(|(d, m)| *d *= m);
        self.grid.inverse(&mut data);
        data.into_iter().map(|d| d.re).collect()
    }

    pub(crate) fn mean_field(&self, coeffs: &[Complex64]) -> Vec<f64> {
        self.mean_field_from(&self.synthesize(coeffs))
    }

    /// `P[w·φ(c)]` for a real grid function `w`.
    pub(crate) fn apply_potential(&self, w: &[f64], coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut field = self.synthesize(coeffs);
        field.iter_mut().zip(w).for_each(|(f, w)| *f *= w);
        self.analyze(field)
    }

    /// `Σ_k α(n−k) V̂(2πk/L) β(k)` for every lattice mode.
    pub fn nonlinear(&self, coeffs: &[Complex64], method: RhsMethod) -> Vec<Complex64> {
        match method {
            RhsMethod::Fft => {
                let field = self.synthesize(coeffs);
                let w = self.mean_field_from(&field);
                let product = field.iter().zip(&w).map(|(f, w)| f * w).collect();
                self.analyze(product)
            }
            RhsMethod::Direct => {
                let beta = autocorrelation_direct(&self.lattice, coeffs);
                let diff = beta.lattice();
                let weighted: Vec<Complex64> = beta
                    .values()
                    .iter()
                    .zip(&self.interaction)
                    .map(|(b, v)| b * v)
                    .collect();
                let order = self.lattice.reduction_order();
                self.lattice
                    .modes()
                    .map(|n| {
                        let mut acc = Complex64::default();
                        for &j in order.iter() {
                            let m = self.lattice.mode(j as usize);
                            let k = [n[0] - m[0], n[1] - m[1], n[2] - m[2]];
                            let ki = diff.index(k).expect("difference of two lattice modes");
                            acc += coeffs[j as usize] * weighted[ki];
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    /// `dα/dt = −i(Kα + N(α))`.
    pub fn rhs_coeffs(&self, coeffs: &[Complex64], method: RhsMethod) -> Vec<Complex64> {
        let nl = self.nonlinear(coeffs, method);
        coeffs
            .iter()
            .zip(&nl)
            .zip(&self.kinetic)
            .map(|((a, n), k)| Complex64::new(0.0, -1.0) * (a * k + n))
            .collect()
    }

    pub fn rhs(&self, state: &SpectralState, method: RhsMethod) -> Vec<Complex64> {
        self.rhs_coeffs(state.coeffs(), method)
    }

    /// `α(n) ↦ e^{−i(4π²|n|²/L²)τ} α(n)`.
    pub fn kinetic_flow(&self, coeffs: &mut [Complex64], tau: f64) {
        for (c, k) in coeffs.iter_mut().zip(&self.kinetic) {
            *c *= Complex64::from_polar(1.0, -k * tau);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_state, StateSpec};
    use std::f64::consts::PI;

    fn gaussian() -> PotentialModel {
        PotentialModel::gaussian(1.0, 1.0).unwrap()
    }

    #[test]
    fn plane_wave_rhs() {
        let lat = TorusLattice::new(4.0, 2).unwrap();
        let sys = HartreeSystem::new(&gaussian(), lat, true).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [1, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        let omega = 4.0 * PI * PI / 16.0 + sys.b();
        for method in [RhsMethod::Direct, RhsMethod::Fft] {
            let d = sys.rhs(&s, method);
            for (i, v) in d.iter().enumerate() {
                let expect = if lat.mode(i) == [1, 0, 0] {
                    Complex64::new(0.0, -omega)
                } else {
                    Complex64::default()
                };
                assert!((v - expect).norm() < 1e-12, "{method:?} {i}");
            }
        }
    }

    #[test]
    fn two_equal_modes_direct_matches_fft() {
        let lat = TorusLattice::new(3.0, 2).unwrap();
        let sys = HartreeSystem::new(&gaussian(), lat, true).unwrap();
        let mut c = vec![Complex64::default(); lat.len()];
        c[lat.index([0, 0, 0]).unwrap()] = Complex64::new(1.0, 0.0);
        c[lat.index([1, 1, 0]).unwrap()] = Complex64::new(0.0, 1.0);
        let s = SpectralState::normalized(lat, 1.0, c).unwrap();
        let a = sys.rhs(&s, RhsMethod::Direct);
        let b = sys.rhs(&s, RhsMethod::Fft);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn aliased_grid_still_exact_on_plane_wave() {
        let lat = TorusLattice::new(4.0, 2).unwrap();
        let sys = HartreeSystem::new(&gaussian(), lat, false).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [0, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        let d = sys.rhs(&s, RhsMethod::Fft);
        assert!((d[lat.index([0, 0, 0]).unwrap()] - Complex64::new(0.0, -sys.b())).norm() < 1e-12);
    }
}
