//! Time stepping for the momentum-space Hartree equation.

mod picard;
mod split;
mod system;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use picard::{lifespan_guard, LifespanGuard, PicardConfig};
pub use system::{HartreeSystem, RhsMethod};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    SplitStrang,
    Rk4,
    Picard,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Method,
    pub dt: f64,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default = "yes")]
    pub dealias: bool,
}

impl IntegratorConfig {
    pub fn split(dt: f64) -> Self {
        Self {
            method: Method::SplitStrang,
            dt,
            picard: PicardConfig::default(),
            dealias: true,
        }
    }

    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        self.picard.validate()
    }
}

/// States recorded every `stride` steps, plus the initial and final ones.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub stride: usize,
    pub states: Vec<SpectralState>,
}

impl Trajectory {
    pub fn last(&self) -> &SpectralState {
        self.states
            .last()
            .expect("a trajectory holds at least the initial state")
    }
}

impl HartreeSystem {
    fn check_lattice(&self, state: &SpectralState) -> Result<()> {
        if state.lattice() != self.lattice() {
            return Err(invalid("state and system use different lattices"));
        }
        Ok(())
    }

    pub fn step_split(&self, state: &SpectralState, dt: f64) -> Result<SpectralState> {
        self.check_lattice(state)?;
        let t = state.t() + dt;
        let coeffs = self
            .split_step_coeffs(state.coeffs(), dt)
            .map_err(|e| match e {
                Error::Instability { .. } => Error::Instability { t },
                other => other,
            })?;
        Ok(state.with_coeffs(t, coeffs))
    }

    /// Classical RK4 on the FFT right-hand side; mass is not renormalized.
    pub fn step_rk4(&self, state: &SpectralState, dt: f64) -> Result<SpectralState> {
        self.check_lattice(state)?;
        let a = state.coeffs();
        let axpy = |x: &[Complex64], y: &[Complex64], h: f64| -> Vec<Complex64> {
            x.iter().zip(y).map(|(x, y)| x + y * h).collect()
        };
        let k1 = self.rhs_coeffs(a, RhsMethod::Fft);
        let k2 = self.rhs_coeffs(&axpy(a, &k1, 0.5 * dt), RhsMethod::Fft);
        let k3 = self.rhs_coeffs(&axpy(a, &k2, 0.5 * dt), RhsMethod::Fft);
        let k4 = self.rhs_coeffs(&axpy(a, &k3, dt), RhsMethod::Fft);
        let out: Vec<Complex64> = (0..a.len())
            .map(|i| a[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
            .collect();
        let t = state.t() + dt;
        if out.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Instability { t });
        }
        Ok(state.with_coeffs(t, out))
    }

    pub fn step(
        &self,
        state: &SpectralState,
        dt: f64,
        config: &IntegratorConfig,
    ) -> Result<SpectralState> {
        match config.method {
            Method::SplitStrang => self.step_split(state, dt),
            Method::Rk4 => self.step_rk4(state, dt),
            Method::Picard => self.picard_solve(state, dt, &config.picard),
        }
    }

    /// Advances to `state.t() + t_final` with fixed steps and one shortened final
    /// step if needed, calling `observe` on the initial state, every `stride`
    /// steps, and on the final state.
    pub fn evolve_with(
        &self,
        state: &SpectralState,
        t_final: f64,
        config: &IntegratorConfig,
        stride: usize,
        mut observe: impl FnMut(&SpectralState) -> Result<()>,
    ) -> Result<SpectralState> {
        config.validate()?;
        self.check_lattice(state)?;
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(invalid(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if stride == 0 {
            return Err(invalid("diagnostics stride must be at least 1"));
        }
        if config.dealias != self.dealias() {
            return Err(invalid(
                "integrator dealiasing flag does not match the system",
            ));
        }
        if config.method == Method::Picard {
            let guard = lifespan_guard(state, self.b()).guard;
            if t_final >= guard {
                return Err(Error::BeyondGuard { t: t_final, guard });
            }
        }

        let dt = config.dt;
        let ratio = t_final / dt;
        let mut full = (ratio + 1e-9).floor() as usize;
        let mut remainder = t_final - full as f64 * dt;
        if remainder <= 1e-9 * dt {
            remainder = 0.0;
        }
        if full == 0 && remainder == 0.0 {
            full = 1;
        }
        let total = full + usize::from(remainder > 0.0);
        let t0 = state.t();

        observe(state)?;
        let mut current = state.clone();
        for k in 1..=total {
            let h = if k <= full { dt } else { remainder };
            let target = if k < total {
                t0 + k as f64 * dt
            } else {
                t0 + t_final
            };
            let next = self.step(&current, h, config).map_err(|e| Error::AtTime {
                t: target,
                source: Box::new(e),
            })?;
            current = next.with_coeffs(target, next.coeffs().to_vec());
            if k % stride == 0 || k == total {
                observe(&current)?;
            }
        }
        Ok(current)
    }

    pub fn evolve(
        &self,
        state: &SpectralState,
        t_final: f64,
        config: &IntegratorConfig,
        stride: usize,
    ) -> Result<Trajectory> {
        let mut states = Vec::new();
        self.evolve_with(state, t_final, config, stride, |s| {
            states.push(s.clone());
            Ok(())
        })?;
        Ok(Trajectory { stride, states })
    }
}
