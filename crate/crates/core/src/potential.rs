//! Whole-space radial pair potentials and their periodization on the torus.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::TorusLattice;
use crate::quadrature::gauss_legendre;
use crate::spline::CubicSpline;

/// Constants of the two-sided decay hypothesis
/// `0 ≤ V(y) ≤ C/(1+|y|)^{3+δ1}`, `|V̂(p)| ≤ C/(1+|p|)^{3+δ2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    #[serde(rename = "C")]
    pub c: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl DecayConstants {
    fn validate(&self) -> Result<()> {
        if !(self.delta2 > 4.0) {
            return Err(invalid(format!(
                "delta2 must exceed 4, got {}",
                self.delta2
            )));
        }
        if !(self.delta1 > 0.0) {
            return Err(invalid(format!(
                "delta1 must be positive, got {}",
                self.delta1
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(invalid(format!(
                "decay constant C must be positive, got {}",
                self.c
            )));
        }
        Ok(())
    }

    /// `4C(1+δ2)^{1+δ2}/(3+δ2)^{3+δ2}`, the supremum of `|p|²·C/(1+|p|)^{3+δ2}`.
    pub fn kinetic_weighted_bound(&self) -> f64 {
        let d = self.delta2;
        4.0 * self.c * (1.0 + d).powf(1.0 + d) / (3.0 + d).powf(3.0 + d)
    }
}

fn default_delta() -> f64 {
    5.0
}

/// Potential block of a run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Gaussian {
        amplitude: f64,
        sigma: f64,
        /// Fitted on the default verification grid when omitted.
        #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default = "default_delta")]
        delta1: f64,
        #[serde(default = "default_delta")]
        delta2: f64,
    },
    TabulatedRadial {
        radii: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        momentum_max: Option<f64>,
        #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default = "default_delta")]
        delta1: f64,
        #[serde(default = "default_delta")]
        delta2: f64,
    },
}

#[derive(Clone, Debug)]
enum Profile {
    Gaussian { amplitude: f64, sigma: f64 },
    Tabulated(RadialTable),
}

#[derive(Clone, Debug)]
struct RadialTable {
    space: CubicSpline,
    momentum: CubicSpline,
    radius_max: f64,
    momentum_max: f64,
    transform_at_zero: f64,
}

/// Radial pair potential `V_∞` with Fourier transform `V̂_∞(p) = ∫ e^{-ip·y} V_∞(y) dy`.
#[derive(Clone, Debug)]
pub struct PotentialModel {
    profile: Profile,
    decay: DecayConstants,
}

/// Sampling radii used by [`PotentialModel::check_decay`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayGrid {
    pub radius_max: f64,
    pub momentum_max: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    /// Smallest `bound − value` in position space and where it occurred.
    pub space_margin: f64,
    pub space_radius: f64,
    pub momentum_margin: f64,
    pub momentum_radius: f64,
}

/// Per-axis truncations for the two periodization routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    /// Fourier modes `|k|_∞ ≤ fourier`.
    pub fourier: usize,
    /// Images `|n|_∞ ≤ images`.
    pub images: usize,
}

impl Truncation {
    pub fn uniform(n: usize) -> Self {
        Self {
            fourier: n,
            images: n,
        }
    }

    pub fn default_for(length: f64) -> Self {
        Self {
            fourier: 2 * length.ceil() as usize,
            images: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodizedValue {
    pub fourier: f64,
    pub images: f64,
    pub tolerance: f64,
}

impl PeriodizedValue {
    pub fn value(&self) -> f64 {
        0.5 * (self.fourier + self.images)
    }
}

impl PotentialModel {
    /// Gaussian `A·exp(-|y|²/(2σ²))` with `C` fitted for `δ1 = δ2 = 5`.
    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        let probe = Self::gaussian_with_decay(
            amplitude,
            sigma,
            DecayConstants {
                c: 1.0,
                delta1: 5.0,
                delta2: 5.0,
            },
        )?;
        probe.refit()
    }

    /// Gaussian with user decay constants. Only the `δ` gates are enforced here;
    /// run [`check_decay`](Self::check_decay) to test `C`.
    pub fn gaussian_with_decay(amplitude: f64, sigma: f64, decay: DecayConstants) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(invalid(format!(
                "gaussian amplitude must be positive, got {amplitude}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid(format!(
                "gaussian width must be positive, got {sigma}"
            )));
        }
        decay.validate()?;
        Ok(Self {
            profile: Profile::Gaussian { amplitude, sigma },
            decay,
        })
    }

    /// Radial table `r ↦ V(r)`, cubic-spline interpolated and zero beyond the last radius.
    /// The transform is tabulated up to `momentum_max` by radial quadrature.
    pub fn tabulated(
        radii: Vec<f64>,
        values: Vec<f64>,
        momentum_max: f64,
        decay: DecayConstants,
    ) -> Result<Self> {
        decay.validate()?;
        if radii.len() != values.len() || radii.len() < 4 {
            return Err(invalid(
                "radial table needs at least four (radius, value) pairs of equal length",
            ));
        }
        if radii[0] != 0.0 {
            return Err(invalid("radial table must start at r = 0"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("table radii must be strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("table values must be finite and non-negative"));
        }
        if !(momentum_max.is_finite() && momentum_max > 0.0) {
            return Err(invalid("momentum_max must be positive"));
        }
        let radius_max = radii[radii.len() - 1];
        let space = CubicSpline::natural(radii, values);

        // Panels short enough to resolve sin(p r) at the largest momentum.
        let panels = ((momentum_max * radius_max / 2.0).ceil() as usize).max(64);
        let (gx, gw) = gauss_legendre(12, 0.0, 1.0);
        let h = radius_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * gx.len());
        for j in 0..panels {
            for (&u, &w) in gx.iter().zip(&gw) {
                let r = (j as f64 + u) * h;
                nodes.push((r, w * h * r * r * space.eval(r)));
            }
        }
        let transform = |p: f64| -> f64 {
            4.0 * PI * nodes.iter().map(|&(r, wv)| wv * sinc(p * r)).sum::<f64>()
        };
        let dp = PI / (8.0 * radius_max);
        let count = (momentum_max / dp).ceil() as usize + 1;
        let ps: Vec<f64> = (0..count)
            .map(|i| momentum_max * i as f64 / (count - 1) as f64)
            .collect();
        let vs: Vec<f64> = ps.iter().map(|&p| transform(p)).collect();
        let transform_at_zero = vs[0];
        if !(transform_at_zero > 0.0) {
            return Err(invalid("tabulated potential has non-positive integral"));
        }
        if let Some((p, v)) = ps
            .iter()
            .zip(&vs)
            .find(|(_, v)| **v < -1e-9 * transform_at_zero)
        {
            return Err(invalid(format!(
                "tabulated potential has a negative Fourier transform {v} at |p| = {p}"
            )));
        }
        Ok(Self {
            profile: Profile::Tabulated(RadialTable {
                space,
                momentum: CubicSpline::natural(ps, vs),
                radius_max,
                momentum_max,
                transform_at_zero,
            }),
            decay,
        })
    }

    /// Builds the model and verifies the decay hypothesis on the default grid.
    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        let (model, fit) = match spec {
            PotentialSpec::Gaussian {
                amplitude,
                sigma,
                c,
                delta1,
                delta2,
            } => {
                let decay = DecayConstants {
                    c: c.unwrap_or(1.0),
                    delta1: *delta1,
                    delta2: *delta2,
                };
                (
                    Self::gaussian_with_decay(*amplitude, *sigma, decay)?,
                    c.is_none(),
                )
            }
            PotentialSpec::TabulatedRadial {
                radii,
                values,
                momentum_max,
                c,
                delta1,
                delta2,
            } => {
                let decay = DecayConstants {
                    c: c.unwrap_or(1.0),
                    delta1: *delta1,
                    delta2: *delta2,
                };
                let pmax = momentum_max.unwrap_or(40.0);
                (
                    Self::tabulated(radii.clone(), values.clone(), pmax, decay)?,
                    c.is_none(),
                )
            }
        };
        let model = if fit { model.refit()? } else { model };
        model.check_decay(&model.default_decay_grid())?;
        Ok(model)
    }

    fn refit(self) -> Result<Self> {
        let grid = self.default_decay_grid();
        let c = self.fit_decay_constant(&grid)?;
        Ok(Self {
            decay: DecayConstants { c, ..self.decay },
            ..self
        })
    }

    pub fn decay(&self) -> DecayConstants {
        self.decay
    }

    /// `b = V̂_∞(0) = ‖V_∞‖_{L¹}`.
    pub fn b(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian { amplitude, sigma } => {
                amplitude * (2.0 * PI * sigma * sigma).powf(1.5)
            }
            Profile::Tabulated(t) => t.transform_at_zero,
        }
    }

    /// `V_∞` at distance `r` from the origin.
    pub fn space_radial(&self, r: f64) -> f64 {
        match &self.profile {
            Profile::Gaussian { amplitude, sigma } => {
                amplitude * (-r * r / (2.0 * sigma * sigma)).exp()
            }
            Profile::Tabulated(t) => {
                if r > t.radius_max {
                    0.0
                } else {
                    t.space.eval(r).max(0.0)
                }
            }
        }
    }

    /// `V̂_∞` at momentum magnitude `p`.
    pub fn fourier_radial(&self, p: f64) -> Result<f64> {
        let p = p.abs();
        match &self.profile {
            Profile::Gaussian { amplitude, sigma } => Ok(amplitude
                * (2.0 * PI * sigma * sigma).powf(1.5)
                * (-sigma * sigma * p * p / 2.0).exp()),
            Profile::Tabulated(t) => {
                if p > t.momentum_max {
                    return Err(Error::OutOfRange {
                        momentum: p,
                        limit: t.momentum_max,
                    });
                }
                Ok(t.momentum.eval(p).max(0.0))
            }
        }
    }

    pub fn fourier_profile(&self, p: [f64; 3]) -> Result<f64> {
        self.fourier_radial(norm(p))
    }

    /// Largest momentum magnitude the transform can be queried at.
    pub fn momentum_limit(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian { .. } => f64::INFINITY,
            Profile::Tabulated(t) => t.momentum_max,
        }
    }

    /// `V̂_∞(2πk/L)` for every mode of `lattice`, in storage order.
    pub fn lattice_samples(&self, lattice: &TorusLattice) -> Result<Vec<f64>> {
        lattice
            .modes()
            .map(|k| self.fourier_profile(lattice.momentum(k)))
            .collect()
    }

    /// `V_L(x)` by both the Fourier series and the image sum, checked for agreement.
    pub fn periodized_eval(
        &self,
        x: [f64; 3],
        length: f64,
        truncation: Truncation,
    ) -> Result<PeriodizedValue> {
        if !(length > 0.0) {
            return Err(invalid("box length must be positive"));
        }
        if truncation.fourier == 0 || truncation.images == 0 {
            return Err(invalid("periodization truncation must be at least 1"));
        }
        let x = x.map(|c| c - length * (c / length).round());

        let kf = truncation.fourier as i64;
        let scale = 2.0 * PI / length;
        let mut fourier = 0.0;
        for k0 in -kf..=kf {
            for k1 in -kf..=kf {
                for k2 in -kf..=kf {
                    let p = [scale * k0 as f64, scale * k1 as f64, scale * k2 as f64];
                    let phase = p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
                    fourier += self.fourier_profile(p)? * phase.cos();
                }
            }
        }
        fourier /= length.powi(3);

        let ni = truncation.images as i64;
        let mut images = 0.0;
        for n0 in -ni..=ni {
            for n1 in -ni..=ni {
                for n2 in -ni..=ni {
                    let y = [
                        x[0] + n0 as f64 * length,
                        x[1] + n1 as f64 * length,
                        x[2] + n2 as f64 * length,
                    ];
                    images += self.space_radial(norm(y));
                }
            }
        }

        let tolerance = 1e-10_f64.max(
            self.fourier_tail(length, truncation.fourier)
                + self.image_tail(length, truncation.images),
        );
        if (fourier - images).abs() > tolerance {
            return Err(Error::Consistency {
                point: x,
                fourier,
                images,
                tolerance,
            });
        }
        Ok(PeriodizedValue {
            fourier,
            images,
            tolerance,
        })
    }

    /// Bound on the Fourier-series terms with `|k|_∞ > cutoff`.
    fn fourier_tail(&self, length: f64, cutoff: usize) -> f64 {
        let d = self.decay;
        let scale = 2.0 * PI / length;
        shell_tail(cutoff, d.delta2, |s| {
            d.c / (1.0 + scale * s).powf(3.0 + d.delta2)
        }) / length.powi(3)
    }

    /// Bound on the image terms with `|n|_∞ > cutoff` for `x` in the fundamental cell.
    fn image_tail(&self, length: f64, cutoff: usize) -> f64 {
        let d = self.decay;
        shell_tail(cutoff, d.delta1, |s| {
            d.c / (1.0 + (s - 0.5) * length).powf(3.0 + d.delta1)
        })
    }

    /// `‖V_L‖₁ = ∫_{Λ_L} V_L = V̂_∞(0)`; independent of `L`.
    pub fn potential_l1(&self, _length: f64) -> f64 {
        self.b()
    }

    /// `‖V_L‖₂` by Parseval over `|k|_∞ ≤ cutoff`.
    pub fn potential_l2(&self, length: f64, cutoff: usize) -> Result<f64> {
        let m = cutoff as i64;
        let scale = 2.0 * PI / length;
        // Accumulate by shells so the sum is monotone in the cutoff bit-for-bit.
        let mut total = 0.0;
        for s in 0..=m {
            let mut shell = 0.0;
            for k0 in -s..=s {
                for k1 in -s..=s {
                    for k2 in -s..=s {
                        if k0.abs().max(k1.abs()).max(k2.abs()) != s {
                            continue;
                        }
                        let v = self.fourier_profile([
                            scale * k0 as f64,
                            scale * k1 as f64,
                            scale * k2 as f64,
                        ])?;
                        shell += v * v;
                    }
                }
            }
            total += shell;
        }
        Ok((total / length.powi(3)).sqrt())
    }

    /// `‖V_∞‖_{L²(ℝ³)}`.
    pub fn whole_space_l2(&self) -> f64 {
        match &self.profile {
            Profile::Gaussian { amplitude, sigma } => {
                (amplitude * amplitude * (PI * sigma * sigma).powf(1.5)).sqrt()
            }
            Profile::Tabulated(t) => {
                let (gx, gw) = gauss_legendre(12, 0.0, 1.0);
                let panels = 512;
                let h = t.radius_max / panels as f64;
                let mut acc = 0.0;
                for j in 0..panels {
                    for (&u, &w) in gx.iter().zip(&gw) {
                        let r = (j as f64 + u) * h;
                        let v = self.space_radial(r);
                        acc += w * h * r * r * v * v;
                    }
                }
                (4.0 * PI * acc).sqrt()
            }
        }
    }

    pub fn default_decay_grid(&self) -> DecayGrid {
        match &self.profile {
            Profile::Gaussian { sigma, .. } => DecayGrid {
                radius_max: 40.0 * sigma,
                momentum_max: 40.0 / sigma,
                points: 8001,
            },
            Profile::Tabulated(t) => DecayGrid {
                radius_max: 1.5 * t.radius_max,
                momentum_max: t.momentum_max,
                points: 8001,
            },
        }
    }

    /// Checks both decay inequalities on a uniform radial grid.
    pub fn check_decay(&self, grid: &DecayGrid) -> Result<DecayReport> {
        self.decay.validate()?;
        if grid.points < 2 || !(grid.radius_max > 0.0) || !(grid.momentum_max > 0.0) {
            return Err(invalid(
                "decay grid needs two or more points and positive radii",
            ));
        }
        let d = self.decay;
        let mut report = DecayReport {
            space_margin: f64::INFINITY,
            space_radius: 0.0,
            momentum_margin: f64::INFINITY,
            momentum_radius: 0.0,
        };
        for i in 0..grid.points {
            let r = grid.radius_max * i as f64 / (grid.points - 1) as f64;
            let v = self.space_radial(r);
            let bound = d.c / (1.0 + r).powf(3.0 + d.delta1);
            if v < 0.0 || v > bound {
                return Err(Error::DecayViolation {
                    space: "position",
                    radius: r,
                    value: v,
                    bound,
                });
            }
            if bound - v < report.space_margin {
                report.space_margin = bound - v;
                report.space_radius = r;
            }

            let p =
                grid.momentum_max.min(self.momentum_limit()) * i as f64 / (grid.points - 1) as f64;
            let v = self.fourier_radial(p)?;
            let bound = d.c / (1.0 + p).powf(3.0 + d.delta2);
            if v.abs() > bound {
                return Err(Error::DecayViolation {
                    space: "momentum",
                    radius: p,
                    value: v,
                    bound,
                });
            }
            if bound - v.abs() < report.momentum_margin {
                report.momentum_margin = bound - v.abs();
                report.momentum_radius = p;
            }
        }
        Ok(report)
    }

    /// Smallest `C` (with 1% headroom for between-sample peaks) satisfying both
    /// inequalities on `grid` for the model's `δ1, δ2`.
    pub fn fit_decay_constant(&self, grid: &DecayGrid) -> Result<f64> {
        let d = self.decay;
        let mut c: f64 = 0.0;
        for i in 0..grid.points {
            let r = grid.radius_max * i as f64 / (grid.points - 1) as f64;
            c = c.max(self.space_radial(r) * (1.0 + r).powf(3.0 + d.delta1));
            let p =
                grid.momentum_max.min(self.momentum_limit()) * i as f64 / (grid.points - 1) as f64;
            c = c.max(self.fourier_radial(p)?.abs() * (1.0 + p).powf(3.0 + d.delta2));
        }
        Ok(1.01 * c)
    }
}

/// `Σ_{s > cutoff} (24s² + 2)·term(s)` for a term decaying like `s^{-3-δ}`,
/// summed explicitly for a while and closed with an integral remainder.
fn shell_tail(cutoff: usize, delta: f64, term: impl Fn(f64) -> f64) -> f64 {
    const EXPLICIT: usize = 4000;
    let mut acc = 0.0;
    for s in cutoff + 1..=cutoff + EXPLICIT {
        let s = s as f64;
        acc += (24.0 * s * s + 2.0) * term(s);
    }
    // term(s) ≤ term_coef·s^{-3-δ} beyond the explicit range.
    let last = (cutoff + EXPLICIT) as f64;
    let coef = term(last) * last.powf(3.0 + delta);
    acc + 26.0 * coef * last.powf(-delta) / delta
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PotentialModel {
        PotentialModel::gaussian(1.0, 1.0).unwrap()
    }

    #[test]
    fn gaussian_transform_values() {
        let m = unit();
        let b = (2.0 * PI).powf(1.5);
        assert!((m.b() - 15.749609945722419).abs() < 1e-12);
        assert!((m.fourier_profile([0.0, 0.0, 1.0]).unwrap() - b * (-0.5f64).exp()).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = m.fourier_radial(i as f64 * 0.1).unwrap();
            assert!(v <= prev && v >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn gaussian_transform_matches_radial_quadrature() {
        // 4π ∫ r² V(r) sinc(pr) dr, independent of the closed form.
        let m = unit();
        let (x, w) = gauss_legendre(200, 0.0, 14.0);
        for p in [0.0, 0.7, 1.0, 2.5] {
            let q: f64 = 4.0
                * PI
                * x.iter()
                    .zip(&w)
                    .map(|(r, w)| w * r * r * m.space_radial(*r) * sinc(p * r))
                    .sum::<f64>();
            assert!((q - m.fourier_radial(p).unwrap()).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn periodization_routes_agree() {
        let m = unit();
        let v = m
            .periodized_eval([2.0, 0.0, 0.0], 4.0, Truncation::uniform(6))
            .unwrap();
        assert!((v.fourier - v.images).abs() < 1e-10);
        let origin = m
            .periodized_eval([0.0; 3], 8.0, Truncation::default_for(8.0))
            .unwrap();
        assert!((origin.images - 1.0).abs() < 1e-12);
        let a = m
            .periodized_eval([0.3, -1.1, 0.9], 5.0, Truncation::default_for(5.0))
            .unwrap();
        let b = m
            .periodized_eval([-0.3, 1.1, -0.9], 5.0, Truncation::default_for(5.0))
            .unwrap();
        assert!((a.value() - b.value()).abs() < 1e-12);
    }

    #[test]
    fn too_coarse_truncation_is_reported() {
        // One Fourier shell cannot represent a narrow bump. With honest decay
        // constants the tail bound absorbs the gap; understated ones expose it.
        let honest = PotentialModel::gaussian(1.0, 0.3).unwrap();
        let coarse = Truncation {
            fourier: 1,
            images: 3,
        };
        let v = honest.periodized_eval([0.0; 3], 4.0, coarse).unwrap();
        assert!((v.fourier - v.images).abs() > 0.5 && v.tolerance > 0.5);
        let decay = DecayConstants {
            c: 1e-6,
            delta1: 5.0,
            delta2: 5.0,
        };
        let understated = PotentialModel::gaussian_with_decay(1.0, 0.3, decay).unwrap();
        let err = understated.periodized_eval([0.0; 3], 4.0, coarse);
        assert!(matches!(err, Err(Error::Consistency { .. })), "{err:?}");
    }

    #[test]
    fn l1_and_l2() {
        let m = unit();
        assert_eq!(m.potential_l1(3.0), m.b());
        let two = PotentialModel::gaussian(2.0, 1.0).unwrap();
        assert!((two.b() - 2.0 * m.b()).abs() < 1e-12);
        assert!((m.potential_l2(8.0, 0).unwrap() - m.b() / 8f64.powf(1.5)).abs() < 1e-14);
        assert!(
            (two.potential_l2(8.0, 5).unwrap() - 2.0 * m.potential_l2(8.0, 5).unwrap()).abs()
                < 1e-12
        );
        let mut prev = 0.0;
        for cutoff in 0..20 {
            let v = m.potential_l2(8.0, cutoff).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!((prev - m.whole_space_l2()).abs() < 1e-2 * m.whole_space_l2());
    }

    #[test]
    fn decay_gates() {
        let bad = DecayConstants {
            c: 1.0,
            delta1: 5.0,
            delta2: 3.0,
        };
        assert!(matches!(
            PotentialModel::gaussian_with_decay(1.0, 1.0, bad),
            Err(Error::InvalidParameter(_))
        ));
        let tiny = DecayConstants {
            c: 0.1,
            delta1: 5.0,
            delta2: 5.0,
        };
        let m = PotentialModel::gaussian_with_decay(1.0, 1.0, tiny).unwrap();
        match m.check_decay(&m.default_decay_grid()) {
            Err(Error::DecayViolation { space, radius, .. }) => {
                assert_eq!(space, "position");
                assert_eq!(radius, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn moderate_constant_fails_in_momentum_space() {
        let m = PotentialModel::gaussian_with_decay(
            1.0,
            1.0,
            DecayConstants {
                c: 16.0,
                delta1: 5.0,
                delta2: 5.0,
            },
        )
        .unwrap();
        match m.check_decay(&m.default_decay_grid()) {
            Err(Error::DecayViolation { space, radius, .. }) => {
                assert_eq!(space, "momentum");
                assert!(radius > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fitted_constant_passes() {
        let m = unit();
        let report = m.check_decay(&m.default_decay_grid()).unwrap();
        assert!(report.space_margin >= 0.0 && report.momentum_margin >= 0.0);
        // The momentum-space peak of V̂(p)(1+p)^8 dominates.
        assert!(
            m.decay().c > 1.5e4 && m.decay().c < 1.7e4,
            "{}",
            m.decay().c
        );
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"family":"gaussian","amplitude":1.0,"sigma":1.0,"delta1":5.0,"delta2":5.0}"#;
        let spec: PotentialSpec = serde_json::from_str(json).unwrap();
        let m = PotentialModel::from_spec(&spec).unwrap();
        assert!((m.b() - unit().b()).abs() < 1e-15);
        let bad = r#"{"family":"gaussian","amplitude":1.0,"sigma":1.0,"C":16.0}"#;
        let spec: PotentialSpec = serde_json::from_str(bad).unwrap();
        assert!(PotentialModel::from_spec(&spec).is_err());
    }

    fn tabulated_gaussian() -> PotentialModel {
        let radii: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r / 2.0).exp()).collect();
        let decay = DecayConstants {
            c: 2e4,
            delta1: 5.0,
            delta2: 5.0,
        };
        PotentialModel::tabulated(radii, values, 12.0, decay).unwrap()
    }

    #[test]
    fn tabulated_matches_closed_form() {
        let t = tabulated_gaussian();
        let g = unit();
        assert!((t.b() - g.b()).abs() < 1e-6 * g.b());
        for p in [0.3, 1.0, 2.0, 4.0] {
            assert!(
                (t.fourier_radial(p).unwrap() - g.fourier_radial(p).unwrap()).abs() < 1e-5 * g.b()
            );
        }
        assert!(matches!(
            t.fourier_radial(12.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!((t.whole_space_l2() - g.whole_space_l2()).abs() < 1e-8);
        assert_eq!(t.space_radial(10.5), 0.0);
    }
}
