//! Truncated Fourier representation of the order parameter.

mod init;
mod lattice;
mod snapshot;
mod transform;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use init::{escaping_mode, make_state, StateSpec};
pub use lattice::{format_mode, norm_sq, parse_mode, Mode, TorusLattice};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SnapshotHeader,
};
pub use transform::GridTransform;

use crate::error::{invalid, Error, Result};

/// Normalization tolerance enforced on construction.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Coefficients `α_n` of `Ψ = √ρ Σ_n α_n e^{2πi n·x/L}` with `Σ|α_n|² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    lattice: TorusLattice,
    rho: f64,
    t: f64,
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Direct,
    #[default]
    Fft,
}

/// `β(k) = Σ_m conj(α_m) α_{m+k}` on the difference lattice `|k|_∞ ≤ 2M`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutoCorrelation {
    lattice: TorusLattice,
    values: Vec<Complex64>,
}

impl AutoCorrelation {
    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: Mode) -> Complex64 {
        self.lattice
            .index(k)
            .map_or(Complex64::default(), |i| self.values[i])
    }

    /// `‖|β|² − δ₀‖_{ℓ1}`.
    pub fn gap(&self) -> f64 {
        let zero = self.lattice.index([0, 0, 0]).unwrap_or(0);
        self.lattice.ordered_sum(|i| {
            let v = self.values[i].norm_sqr();
            if i == zero {
                (v - 1.0).abs()
            } else {
                v
            }
        })
    }

    pub fn sum_sq(&self) -> f64 {
        self.lattice.ordered_sum(|i| self.values[i].norm_sqr())
    }
}

/// Complex samples of `Ψ` on the grid `x_j = jL/G`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub side: usize,
    pub length: f64,
    pub values: Vec<Complex64>,
}

impl PhysicalField {
    /// `∫|Ψ|^p` by the rectangle rule.
    pub fn integral_abs_pow(&self, p: i32) -> f64 {
        let cell = (self.length / self.side as f64).powi(3);
        cell * self.values.iter().map(|v| v.norm().powi(p)).sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl SpectralState {
    /// Wraps coefficients that must already be normalized to [`NORM_TOLERANCE`].
    pub fn new(lattice: TorusLattice, rho: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(lattice, rho, 0.0, coeffs)?;
        let mass = state.mass();
        if (mass - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!(
                "coefficients have mass {mass}, expected 1"
            )));
        }
        Ok(state)
    }

    /// Rescales arbitrary non-zero coefficients to unit mass.
    pub fn normalized(lattice: TorusLattice, rho: f64, mut coeffs: Vec<Complex64>) -> Result<Self> {
        let probe = Self::unchecked(lattice, rho, 0.0, coeffs.clone())?;
        let mass = probe.mass();
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("coefficients cannot be normalized"));
        }
        let scale = mass.sqrt().recip();
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Self::unchecked(lattice, rho, 0.0, coeffs)
    }

    /// Checks shape and density only; mass is left to the caller.
    pub fn unchecked(
        lattice: TorusLattice,
        rho: f64,
        t: f64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(invalid(format!(
                "expected {} coefficients for cutoff {}, got {}",
                lattice.len(),
                lattice.cutoff(),
                coeffs.len()
            )));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid(format!("density must be positive, got {rho}")));
        }
        Ok(Self {
            lattice,
            rho,
            t,
            coeffs,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Same lattice and density, new time and coefficients.
    pub fn with_coeffs(&self, t: f64, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self {
            lattice: self.lattice,
            rho: self.rho,
            t,
            coeffs,
        }
    }

    pub fn coeff(&self, n: Mode) -> Complex64 {
        self.lattice
            .index(n)
            .map_or(Complex64::default(), |i| self.coeffs[i])
    }

    /// `Σ|α_n|²`.
    pub fn mass(&self) -> f64 {
        self.lattice.ordered_sum(|i| self.coeffs[i].norm_sqr())
    }

    /// `S = Σ|α_n|`.
    pub fn s_sum(&self) -> f64 {
        self.lattice.ordered_sum(|i| self.coeffs[i].norm())
    }

    /// `T = Σ (4π²|n|²/L²)|α_n|`.
    pub fn t_sum(&self) -> f64 {
        self.lattice
            .ordered_sum(|i| self.lattice.kinetic(self.lattice.mode(i)) * self.coeffs[i].norm())
    }

    /// Kinetic energy per particle `Σ (4π²|n|²/L²)|α_n|²`.
    pub fn kinetic_per_particle(&self) -> f64 {
        self.lattice
            .ordered_sum(|i| self.lattice.kinetic(self.lattice.mode(i)) * self.coeffs[i].norm_sqr())
    }

    /// Weighted Wiener norm of the unit-normalized field: `r = 0` gives `S`,
    /// `r = 2` gives `Σ (1 + 4π²|n|²/L²)|α_n|`.
    pub fn wiener_norm(&self, r: u32) -> Result<f64> {
        match r {
            0 => Ok(self.s_sum()),
            2 => Ok(wiener2(&self.lattice, &self.coeffs)),
            _ => Err(invalid(format!("Wiener order must be 0 or 2, got {r}"))),
        }
    }

    pub fn autocorrelation(&self, method: CorrelationMethod) -> AutoCorrelation {
        match method {
            CorrelationMethod::Direct => autocorrelation_direct(&self.lattice, &self.coeffs),
            CorrelationMethod::Fft => autocorrelation_fft(&self.lattice, &self.coeffs),
        }
    }

    /// Samples `Ψ` on the grid of side `factor·(2M+1)`.
    pub fn to_physical(&self, factor: usize) -> Result<PhysicalField> {
        let grid = GridTransform::for_lattice(&self.lattice, factor)?;
        let embedding = grid.embedding(&self.lattice)?;
        let mut values = grid.scatter(&embedding, &self.coeffs);
        grid.inverse(&mut values);
        let amp = self.rho.sqrt();
        values.iter_mut().for_each(|v| *v *= amp);
        Ok(PhysicalField {
            side: grid.side(),
            length: self.lattice.length(),
            values,
        })
    }

    /// Projects grid samples of `Ψ` onto `lattice`; the result must have unit mass.
    pub fn to_spectral(field: &PhysicalField, lattice: TorusLattice, rho: f64) -> Result<Self> {
        let grid = GridTransform::new(field.side.max(1));
        let embedding = grid.embedding(&lattice)?;
        if field.values.len() != grid.len() {
            return Err(invalid("field sample count does not match its side"));
        }
        let mut data = field.values.clone();
        grid.forward(&mut data);
        let scale = 1.0 / (rho.sqrt() * grid.len() as f64);
        let coeffs = grid
            .gather(&embedding, &data)
            .into_iter()
            .map(|c| c * scale)
            .collect();
        Self::new(lattice, rho, coeffs)
    }

    /// `‖α − α'‖_{ℓ2}` on a shared lattice.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(
            self.lattice, other.lattice,
            "states live on different lattices"
        );
        self.lattice
            .ordered_sum(|i| (self.coeffs[i] - other.coeffs[i]).norm_sqr())
            .sqrt()
    }

    /// `α(n) ↦ conj(α(−n))`, the time-reversal map for even real potentials.
    pub fn conjugate_reflect(&self) -> Self {
        let coeffs = (0..self.lattice.len())
            .map(|i| {
                // Lexicographic storage makes −n the mirrored index.
                self.coeffs[self.lattice.len() - 1 - i].conj()
            })
            .collect();
        self.with_coeffs(self.t, coeffs)
    }

    /// Index and value of the largest `|α_n|`, ties broken by the reduction order.
    pub fn dominant_mode(&self) -> (Mode, Complex64) {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for &i in self.lattice.reduction_order().iter() {
            let a = self.coeffs[i as usize].norm();
            if a > best_abs {
                best_abs = a;
                best = i as usize;
            }
        }
        (self.lattice.mode(best), self.coeffs[best])
    }
}

/// `Σ (1 + 4π²|n|²/L²)|c_n|` for an arbitrary coefficient vector.
pub fn wiener2(lattice: &TorusLattice, coeffs: &[Complex64]) -> f64 {
    lattice.ordered_sum(|i| (1.0 + lattice.kinetic(lattice.mode(i))) * coeffs[i].norm())
}

pub(crate) fn autocorrelation_direct(
    lattice: &TorusLattice,
    coeffs: &[Complex64],
) -> AutoCorrelation {
    let diff = lattice.difference();
    let order = lattice.reduction_order();
    let values = diff
        .modes()
        .map(|k| {
            let mut acc = Complex64::default();
            for &i in order.iter() {
                let m = lattice.mode(i as usize);
                if let Some(j) = lattice.index([m[0] + k[0], m[1] + k[1], m[2] + k[2]]) {
                    acc += coeffs[i as usize].conj() * coeffs[j];
                }
            }
            acc
        })
        .collect();
    AutoCorrelation {
        lattice: diff,
        values,
    }
}

pub(crate) fn autocorrelation_fft(lattice: &TorusLattice, coeffs: &[Complex64]) -> AutoCorrelation {
    let grid = GridTransform::new(2 * lattice.side());
    let embedding = grid
        .embedding(lattice)
        .expect("doubled grid holds the lattice");
    let mut data = grid.scatter(&embedding, coeffs);
    grid.inverse(&mut data);
    data.iter_mut()
        .for_each(|v| *v = Complex64::new(v.norm_sqr(), 0.0));
    grid.forward(&mut data);
    let diff = lattice.difference();
    let diff_embedding = grid
        .embedding(&diff)
        .expect("doubled grid holds the difference lattice");
    let scale = 1.0 / grid.len() as f64;
    let values = grid
        .gather(&diff_embedding, &data)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    AutoCorrelation {
        lattice: diff,
        values,
    }
}

/// Coefficients of the product `f·g` of two fields on a common lattice, on the
/// difference lattice (exact, computed on the doubled grid).
pub fn product_coefficients(
    lattice: &TorusLattice,
    f: &[Complex64],
    g: &[Complex64],
) -> Result<Vec<Complex64>> {
    if f.len() != lattice.len() || g.len() != lattice.len() {
        return Err(invalid("coefficient vectors do not match the lattice"));
    }
    let grid = GridTransform::new(2 * lattice.side());
    let embedding = grid.embedding(lattice)?;
    let mut a = grid.scatter(&embedding, f);
    let mut b = grid.scatter(&embedding, g);
    grid.inverse(&mut a);
    grid.inverse(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    grid.forward(&mut a);
    let diff = lattice.difference();
    let scale = 1.0 / grid.len() as f64;
    Ok(grid
        .gather(&grid.embedding(&diff)?, &a)
        .into_iter()
        .map(|v| v * scale)
        .collect())
}

/// Fails with a size error unless a grid of `side` can resolve `lattice`.
pub fn require_grid(side: usize, lattice: &TorusLattice) -> Result<()> {
    if side < lattice.side() {
        return Err(Error::GridTooSmall {
            side,
            cutoff: lattice.cutoff(),
            required: lattice.side(),
        });
    }
    Ok(())
}
