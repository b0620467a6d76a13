use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::lattice::{Mode, TorusLattice};
use super::SpectralState;
use crate::error::{invalid, Result};

/// Initial-state families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `α = e^{iθ} δ_{k0}`.
    PlaneWave {
        k0: Mode,
        #[serde(default)]
        theta: f64,
    },
    /// Weight `√(ρ/(ρ+1))` at `k0` and `√(1/(ρ+1))` at `(⌊ρ^a L⌋, 0, 0)`.
    TwoMode {
        #[serde(default)]
        k0: Mode,
        escape: f64,
    },
    /// Condensate at `k0` plus random-phase satellites of modulus
    /// `ε ρ^{-γ} (1 + |n − k0|)^{-s}`, renormalized.
    PerturbedCondensate {
        #[serde(default)]
        k0: Mode,
        #[serde(default)]
        theta: f64,
        eps: f64,
        s: f64,
        seed: u64,
        /// `γ` above; zero keeps the perturbation density-independent.
        #[serde(default)]
        eps_density_exponent: f64,
    },
}

impl StateSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            StateSpec::PlaneWave { .. } => "plane_wave",
            StateSpec::TwoMode { .. } => "two_mode",
            StateSpec::PerturbedCondensate { .. } => "perturbed_condensate",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            StateSpec::PerturbedCondensate { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    pub fn with_seed(&self, new_seed: u64) -> Self {
        let mut spec = self.clone();
        if let StateSpec::PerturbedCondensate { seed, .. } = &mut spec {
            *seed = new_seed;
        }
        spec
    }

    /// Condensate mode and phase the state is built around.
    pub fn reference(&self) -> (Mode, f64) {
        match self {
            StateSpec::PlaneWave { k0, theta }
            | StateSpec::PerturbedCondensate { k0, theta, .. } => (*k0, *theta),
            StateSpec::TwoMode { k0, .. } => (*k0, 0.0),
        }
    }
}

/// Escaping mode `(⌊ρ^a L⌋, 0, 0)` of the two-mode family.
pub fn escaping_mode(rho: f64, length: f64, escape: f64) -> Mode {
    [(rho.powf(escape) * length).floor() as i64, 0, 0]
}

pub fn make_state(spec: &StateSpec, lattice: TorusLattice, rho: f64) -> Result<SpectralState> {
    let mut coeffs = vec![Complex64::default(); lattice.len()];
    let slot = |n: Mode| {
        lattice.index(n).ok_or_else(|| {
            invalid(format!(
                "mode {n:?} lies outside the cutoff {}",
                lattice.cutoff()
            ))
        })
    };
    match spec {
        StateSpec::PlaneWave { k0, theta } => {
            coeffs[slot(*k0)?] = Complex64::from_polar(1.0, *theta);
            SpectralState::new(lattice, rho, coeffs)
        }
        StateSpec::TwoMode { k0, escape } => {
            if !escape.is_finite() {
                return Err(invalid("escape exponent must be finite"));
            }
            let far = escaping_mode(rho, lattice.length(), *escape);
            if far == *k0 {
                return Err(invalid(format!("escaping mode {far:?} coincides with k0")));
            }
            coeffs[slot(*k0)?] = Complex64::new((rho / (rho + 1.0)).sqrt(), 0.0);
            coeffs[slot(far)?] = Complex64::new((1.0 / (rho + 1.0)).sqrt(), 0.0);
            SpectralState::new(lattice, rho, coeffs)
        }
        StateSpec::PerturbedCondensate {
            k0,
            theta,
            eps,
            s,
            seed,
            eps_density_exponent,
        } => {
            if !(eps.is_finite() && *eps >= 0.0) {
                return Err(invalid(format!(
                    "perturbation amplitude must be non-negative, got {eps}"
                )));
            }
            if !(s.is_finite() && *s >= 0.0) {
                return Err(invalid(format!(
                    "tail exponent must be non-negative, got {s}"
                )));
            }
            if !eps_density_exponent.is_finite() {
                return Err(invalid("eps_density_exponent must be finite"));
            }
            let centre = slot(*k0)?;
            let amplitude = eps * rho.powf(-eps_density_exponent);
            let mut rng = ChaCha20Rng::seed_from_u64(*seed);
            for (i, c) in coeffs.iter_mut().enumerate() {
                if i == centre {
                    *c = Complex64::from_polar(1.0, *theta);
                    continue;
                }
                let n = lattice.mode(i);
                let d = [n[0] - k0[0], n[1] - k0[1], n[2] - k0[2]];
                let dist = ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt();
                let phase = 2.0 * PI * rng.random::<f64>();
                *c = Complex64::from_polar(amplitude * (1.0 + dist).powf(-s), phase);
            }
            SpectralState::normalized(lattice, rho, coeffs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_is_delta() {
        let lat = TorusLattice::new(4.0, 2).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [1, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        assert_eq!(s.coeff([1, 0, 0]), Complex64::new(1.0, 0.0));
        assert_eq!(s.s_sum(), 1.0);
        assert!(make_state(
            &StateSpec::PlaneWave {
                k0: [3, 0, 0],
                theta: 0.0
            },
            lat,
            1.0
        )
        .is_err());
    }

    #[test]
    fn two_mode_mass_split() {
        let lat = TorusLattice::new(8.0, 8).unwrap();
        // ⌊16^{3/8}·8⌋ = ⌊2.828·8⌋ = 22 lies outside M = 8.
        assert_eq!(escaping_mode(16.0, 8.0, 0.375), [22, 0, 0]);
        assert!(make_state(
            &StateSpec::TwoMode {
                k0: [0, 0, 0],
                escape: 0.375
            },
            lat,
            16.0
        )
        .is_err());
        let big = TorusLattice::new(8.0, 22).unwrap();
        let s = make_state(
            &StateSpec::TwoMode {
                k0: [0, 0, 0],
                escape: 0.375,
            },
            big,
            16.0,
        )
        .unwrap();
        assert!((s.coeff([0, 0, 0]).norm_sqr() - 16.0 / 17.0).abs() < 1e-15);
        assert!((s.coeff([22, 0, 0]).norm_sqr() - 1.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn two_mode_outside_cutoff_is_rejected() {
        let lat = TorusLattice::new(8.0, 8).unwrap();
        assert!(make_state(
            &StateSpec::TwoMode {
                k0: [0, 0, 0],
                escape: 0.375
            },
            lat,
            16.0
        )
        .is_err());
        assert!(make_state(
            &StateSpec::TwoMode {
                k0: [0, 0, 0],
                escape: -5.0
            },
            lat,
            16.0
        )
        .is_err());
    }

    #[test]
    fn perturbed_condensate_is_mostly_condensed() {
        let lat = TorusLattice::new(4.0, 4).unwrap();
        let spec = StateSpec::PerturbedCondensate {
            k0: [0, 0, 0],
            theta: 0.0,
            eps: 0.05,
            s: 6.0,
            seed: 1,
            eps_density_exponent: 0.0,
        };
        let a = make_state(&spec, lat, 10.0).unwrap();
        assert!((a.mass() - 1.0).abs() < 1e-12);
        assert!(a.coeff([0, 0, 0]).norm_sqr() >= 0.99);
        let b = make_state(&spec, lat, 10.0).unwrap();
        assert_eq!(a, b);
        let c = make_state(&spec.with_seed(2), lat, 10.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn density_exponent_shrinks_perturbation() {
        let lat = TorusLattice::new(4.0, 3).unwrap();
        let spec = |g: f64| StateSpec::PerturbedCondensate {
            k0: [0, 0, 0],
            theta: 0.0,
            eps: 0.3,
            s: 2.0,
            seed: 5,
            eps_density_exponent: g,
        };
        let flat = make_state(&spec(0.0), lat, 100.0).unwrap();
        let scaled = make_state(&spec(0.5), lat, 100.0).unwrap();
        assert!(scaled.coeff([0, 0, 0]).norm() > flat.coeff([0, 0, 0]).norm());
    }

    #[test]
    fn spec_json() {
        let s: StateSpec =
            serde_json::from_str(r#"{"family":"perturbed_condensate","eps":0.1,"s":6,"seed":3}"#)
                .unwrap();
        assert_eq!(s.seed(), Some(3));
        assert_eq!(s.family_name(), "perturbed_condensate");
        assert!(serde_json::from_str::<StateSpec>(
            r#"{"family":"plane_wave","k0":[0,0,0],"bogus":1}"#
        )
        .is_err());
    }
}
