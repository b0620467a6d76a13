use num_complex::Complex64;

use super::system::HartreeSystem;
use crate::error::{Error, Result};

/// Iterations allowed for the implicit midpoint potential.
const MAX_FIXED_POINT: usize = 100;
const FIXED_POINT_TOL: f64 = 1e-14;
/// Taylor series are applied in chunks with `|τ|·max|w| ≤` this.
const TAYLOR_REACH: f64 = 0.5;

impl HartreeSystem {
    /// One Strang step: half kinetic, full nonlinear, half kinetic.
    pub fn split_step_coeffs(&self, coeffs: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Instability { t: f64::NAN });
        }
        let mut a = coeffs.to_vec();
        self.kinetic_flow(&mut a, 0.5 * dt);
        let mut a = self.nonlinear_flow(&a, dt)?;
        self.kinetic_flow(&mut a, 0.5 * dt);
        if a.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Instability { t: f64::NAN });
        }
        Ok(a)
    }

    /// `α₁ = exp(−iτ P W̄ P) α₀` with `W̄` the average of the mean fields of
    /// `α₀` and `α₁`, solved by fixed-point iteration.
    ///
    /// The projected multiplication is Hermitian, so the flow is unitary on the
    /// truncated lattice, symmetric in time, and exact whenever `W` is constant.
    pub(crate) fn nonlinear_flow(&self, a0: &[Complex64], tau: f64) -> Result<Vec<Complex64>> {
        let w0 = self.mean_field(a0);
        let mut a1 = self.propagate(&w0, a0, tau);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_FIXED_POINT {
            let w1 = self.mean_field(&a1);
            let mid: Vec<f64> = w0.iter().zip(&w1).map(|(x, y)| 0.5 * (x + y)).collect();
            let next = self.propagate(&mid, a0, tau);
            residual = next
                .iter()
                .zip(&a1)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            a1 = next;
            if residual <= FIXED_POINT_TOL {
                return Ok(a1);
            }
        }
        Err(Error::Convergence {
            iterations: MAX_FIXED_POINT,
            residual,
        })
    }

    /// `exp(−iτ P w P) c` for a real grid potential `w`.
    fn propagate(&self, w: &[f64], coeffs: &[Complex64], tau: f64) -> Vec<Complex64> {
        // The constant part commutes with everything and is applied as a phase.
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let fluct: Vec<f64> = w.iter().map(|x| x - mean).collect();
        let spread = fluct.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let chunks = ((tau.abs() * spread / TAYLOR_REACH).ceil() as usize).max(1);
        let h = tau / chunks as f64;

        let mut out = coeffs.to_vec();
        if spread > 0.0 {
            for _ in 0..chunks {
                out = self.taylor_exp(&fluct, &out, h);
            }
        }
        let phase = Complex64::from_polar(1.0, -mean * tau);
        out.iter_mut().for_each(|c| *c *= phase);
        out
    }

    fn taylor_exp(&self, w: &[f64], coeffs: &[Complex64], h: f64) -> Vec<Complex64> {
        let mut sum = coeffs.to_vec();
        let mut term = coeffs.to_vec();
        for j in 1..=40 {
            let applied = self.apply_potential(w, &term);
            let factor = Complex64::new(0.0, -h / j as f64);
            term = applied.into_iter().map(|x| x * factor).collect();
            let size = term.iter().map(|x| x.norm()).fold(0.0, f64::max);
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            if size < 1e-18 {
                break;
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_state, SpectralState, StateSpec, TorusLattice};
    use crate::potential::PotentialModel;
    use std::f64::consts::PI;

    fn setup(cutoff: usize) -> (HartreeSystem, SpectralState) {
        let lat = TorusLattice::new(4.0, cutoff).unwrap();
        let sys =
            HartreeSystem::new(&PotentialModel::gaussian(1.0, 1.0).unwrap(), lat, true).unwrap();
        let spec = StateSpec::PerturbedCondensate {
            k0: [0, 0, 0],
            theta: 0.0,
            eps: 0.4,
            s: 2.0,
            seed: 4,
            eps_density_exponent: 0.0,
        };
        (sys, make_state(&spec, lat, 10.0).unwrap())
    }

    #[test]
    fn plane_wave_phase_is_exact() {
        let lat = TorusLattice::new(4.0, 2).unwrap();
        let sys =
            HartreeSystem::new(&PotentialModel::gaussian(1.0, 1.0).unwrap(), lat, true).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [1, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        let dt = 0.37;
        let out = sys.split_step_coeffs(s.coeffs(), dt).unwrap();
        let omega = 4.0 * PI * PI / 16.0 + sys.b();
        let expect = Complex64::from_polar(1.0, -omega * dt);
        assert!((out[lat.index([1, 0, 0]).unwrap()] - expect).norm() < 1e-12);
    }

    #[test]
    fn unitary_and_reversible() {
        let (sys, s) = setup(2);
        let fwd = sys.split_step_coeffs(s.coeffs(), 0.01).unwrap();
        let mass: f64 = fwd.iter().map(|c| c.norm_sqr()).sum();
        assert!((mass - 1.0).abs() < 1e-13);
        let back = sys.split_step_coeffs(&fwd, -0.01).unwrap();
        let err = back
            .iter()
            .zip(s.coeffs())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn nonlinear_flow_matches_its_generator() {
        // (α(τ) − α(−τ))/2τ ≈ −i N(α) to O(τ²).
        let (sys, s) = setup(2);
        let tau = 1e-5;
        let plus = sys.nonlinear_flow(s.coeffs(), tau).unwrap();
        let minus = sys.nonlinear_flow(s.coeffs(), -tau).unwrap();
        let nl = sys.nonlinear(s.coeffs(), super::super::RhsMethod::Fft);
        for ((p, m), n) in plus.iter().zip(&minus).zip(&nl) {
            let d = (p - m) / (2.0 * tau);
            assert!((d - Complex64::new(0.0, -1.0) * n).norm() < 1e-7, "{d} {n}");
        }
    }
}
