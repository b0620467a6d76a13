use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::system::{HartreeSystem, RhsMethod};
use crate::error::{invalid, Error, Result};
use crate::field::{wiener2, SpectralState};
use crate::quadrature::{gauss_legendre, integration_matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub max_iter: usize,
    /// Fixed-point tolerance in the `𝔄²` norm.
    pub tol: f64,
    /// Contraction radius factor `τ > 1`.
    pub tau: f64,
    /// Largest Gauss–Legendre rule tried before giving up.
    pub max_nodes: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol: 1e-12,
            tau: 1.5,
            max_nodes: 128,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 1.0) {
            return Err(invalid(format!(
                "contraction factor must exceed 1, got {}",
                self.tau
            )));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("Picard tolerance must be positive"));
        }
        if self.max_iter == 0 || self.max_nodes < 2 {
            return Err(invalid("Picard needs max_iter ≥ 1 and max_nodes ≥ 2"));
        }
        Ok(())
    }
}

/// Certified Picard horizon and its plane-wave asymptote.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LifespanGuard {
    /// `ρ/(12 b ‖Ψ‖²_{𝔄²})` with `‖Ψ‖_{𝔄²} = √ρ·wiener_norm(α, 2)`.
    pub guard: f64,
    /// `1/(12 b)`.
    pub asymptotic: f64,
}

pub fn lifespan_guard(state: &SpectralState, b: f64) -> LifespanGuard {
    let w = wiener2(state.lattice(), state.coeffs());
    let norm_sq = state.rho() * w * w;
    LifespanGuard {
        guard: state.rho() / (12.0 * b * norm_sq),
        asymptotic: 1.0 / (12.0 * b),
    }
}

impl HartreeSystem {
    /// Fixed point of the Duhamel map on `[0, t]`, in the interaction picture
    /// `γ(s) = e^{iKs} α(s)`, with collocation at Gauss–Legendre nodes.
    /// The node count doubles until the end value moves less than `0.1·tol`.
    pub fn picard_solve(
        &self,
        state: &SpectralState,
        t: f64,
        config: &PicardConfig,
    ) -> Result<SpectralState> {
        config.validate()?;
        if !(t > 0.0) {
            return Err(invalid("Picard target time must be positive"));
        }
        let guard = lifespan_guard(state, self.b()).guard;
        if t >= guard {
            return Err(Error::BeyondGuard { t, guard });
        }
        let lattice = *state.lattice();
        let a0 = state.coeffs();
        let limit = config.tau * wiener2(&lattice, a0);

        let mut previous: Option<Vec<Complex64>> = None;
        let mut nodes_count = 4;
        loop {
            let end = self.collocate(a0, t, nodes_count, limit, config)?;
            if let Some(prev) = &previous {
                let diff: Vec<Complex64> = end.iter().zip(prev).map(|(a, b)| a - b).collect();
                if wiener2(&lattice, &diff) < 0.1 * config.tol {
                    return Ok(state.with_coeffs(state.t() + t, end));
                }
            }
            previous = Some(end);
            nodes_count *= 2;
            if nodes_count > config.max_nodes {
                return Err(Error::Convergence {
                    iterations: config.max_nodes,
                    residual: f64::NAN,
                });
            }
        }
    }

    fn collocate(
        &self,
        a0: &[Complex64],
        t: f64,
        n: usize,
        limit: f64,
        config: &PicardConfig,
    ) -> Result<Vec<Complex64>> {
        let lattice = *self.lattice();
        let (nodes, weights) = gauss_legendre(n, 0.0, t);
        let integ = integration_matrix(&nodes, 0.0);
        let minus_i = Complex64::new(0.0, -1.0);

        // Interaction-picture integrand e^{iKs} N(e^{−iKs} γ).
        let integrand = |s: f64, gamma: &[Complex64]| -> Vec<Complex64> {
            let mut a = gamma.to_vec();
            self.kinetic_flow(&mut a, s);
            let mut g = self.nonlinear(&a, RhsMethod::Fft);
            self.kinetic_flow(&mut g, -s);
            g
        };

        // Start from the free flight, γ ≡ α₀.
        let mut gammas: Vec<Vec<Complex64>> = vec![a0.to_vec(); n];
        let mut residual = f64::INFINITY;
        for _ in 0..config.max_iter {
            let g: Vec<Vec<Complex64>> = nodes
                .iter()
                .zip(&gammas)
                .map(|(&s, gm)| integrand(s, gm))
                .collect();
            let mut next = Vec::with_capacity(n);
            residual = 0.0;
            for (j, row) in integ.iter().enumerate() {
                let mut v = a0.to_vec();
                for (l, &w) in row.iter().enumerate() {
                    for (vi, gi) in v.iter_mut().zip(&g[l]) {
                        *vi += minus_i * w * gi;
                    }
                }
                let norm = wiener2(&lattice, &v);
                if norm > limit {
                    return Err(Error::ContractionViolation { norm, limit });
                }
                let diff: Vec<Complex64> = v.iter().zip(&gammas[j]).map(|(a, b)| a - b).collect();
                residual = residual.max(wiener2(&lattice, &diff));
                next.push(v);
            }
            gammas = next;
            if residual < config.tol {
                let g: Vec<Vec<Complex64>> = nodes
                    .iter()
                    .zip(&gammas)
                    .map(|(&s, gm)| integrand(s, gm))
                    .collect();
                let mut end = a0.to_vec();
                for (w, gl) in weights.iter().zip(&g) {
                    for (e, gi) in end.iter_mut().zip(gl) {
                        *e += minus_i * w * gi;
                    }
                }
                self.kinetic_flow(&mut end, t);
                return Ok(end);
            }
        }
        Err(Error::Convergence {
            iterations: config.max_iter,
            residual,
        })
    }
}
