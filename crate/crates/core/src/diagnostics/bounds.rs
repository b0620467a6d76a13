//! Closed-form envelopes and bound calculators. All inputs are scalars so
//! synthetic values can be audited without a trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potential::{PotentialModel, PotentialSpec};

/// `1/(2 S0² b)`, where the S envelope diverges.
pub fn blow_up_time(s0: f64, b: f64) -> f64 {
    1.0 / (2.0 * s0 * s0 * b)
}

fn shrink(s0: f64, b: f64, t: f64) -> Result<f64> {
    let x = 1.0 - 2.0 * s0 * s0 * b * t;
    if !(x > 0.0) {
        return Err(Error::EnvelopeDomain {
            t,
            blow_up: blow_up_time(s0, b),
        });
    }
    Ok(x)
}

/// `S0/√(1 − 2S0²bt)`.
pub fn s_envelope(s0: f64, b: f64, t: f64) -> Result<f64> {
    Ok(s0 / shrink(s0, b, t)?.sqrt())
}

/// `T0/(1−at) + (8C/(27b))·S0·((1−at)^{−3/2} − (1−at)^{−1})` with `a = 2S0²b`.
pub fn t_envelope(s0: f64, t0: f64, b: f64, c: f64, t: f64) -> Result<f64> {
    let x = shrink(s0, b, t)?;
    Ok(t0 / x + 8.0 * c / (27.0 * b) * s0 * (x.powf(-1.5) - 1.0 / x))
}

/// Mass envelope of the plane-wave comparison,
/// `u0·exp(6bt + (2 − 2√(1 − 2S0²bt))/S0)`.
pub fn mass_envelope(u0: f64, s0: f64, b: f64, t: f64) -> Result<f64> {
    let x = shrink(s0, b, t)?;
    Ok(u0 * (6.0 * b * t + (2.0 - 2.0 * x.sqrt()) / s0).exp())
}

/// `ω = max{1, h}` with `h` the Gronwall bracket evaluated on the S and T
/// envelopes at the horizon.
pub fn omega_coefficient(s0: f64, t0: f64, b: f64, v2: f64, c: f64, horizon: f64) -> Result<f64> {
    let s = s_envelope(s0, b, horizon)?;
    let tk = t_envelope(s0, t0, b, c, horizon)?;
    let v2sq = v2 * v2;
    let h = 4.0 * (2.0 * b + v2sq) * b * b * s.powi(6)
        + 4.0 * b * b * s.powi(4)
        + (16.0 * b + 33.0 / 8.0 * v2sq) * s * s
        + 4.0 * (2.0 * b + v2sq) * tk * tk
        + 6.0 * b * s * tk;
    Ok(h.max(1.0))
}

/// Scalar inputs of the excitation and quasi-vacuum bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    /// Excitation fraction.
    pub n: f64,
    /// Energy-consistency gap per particle.
    pub e: f64,
    /// Quasi-vacuum energy per `ρL³`.
    pub h_xi: f64,
    /// `‖Φ‖_∞/√ρ`.
    pub s_inf: f64,
    /// `‖ΔΦ‖_∞/√ρ`.
    pub d_inf: f64,
    pub b: f64,
    /// `‖V_L‖₂`.
    pub v2: f64,
    pub rho: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n", self.n),
            ("e", self.e),
            ("h_xi", self.h_xi),
            ("s_inf", self.s_inf),
            ("d_inf", self.d_inf),
            ("b", self.b),
            ("v2", self.v2),
            ("rho", self.rho),
            ("L", self.length),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!(
                    "bound input {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.rho == 0.0 {
            return Err(invalid("bound input rho must be positive"));
        }
        Ok(())
    }
}

/// Proof-chain bound on the excitation number per `ρL³`:
/// `e^{ωt}(2h_ξ + ((5b + v2²/4)s_∞² + 1)n) + (2e^{ωt} − 1)/ρ`.
pub fn excitation_bound(inputs: &BoundInputs, omega: f64, t: f64) -> Result<f64> {
    inputs.validate()?;
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be non-negative, got {t}")));
    }
    let g = (omega * t).exp();
    let i = inputs;
    Ok(
        g * (2.0 * i.h_xi + ((5.0 * i.b + i.v2 * i.v2 / 4.0) * i.s_inf * i.s_inf + 1.0) * i.n)
            + (2.0 * g - 1.0) / i.rho,
    )
}

/// `2e + 1/ρ + (14b + v2²)s_∞²n + 2(d_∞ + b s_∞³)√n`.
pub fn quasi_vacuum_energy_bound(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let i = inputs;
    Ok(2.0 * i.e
        + 1.0 / i.rho
        + (14.0 * i.b + i.v2 * i.v2) * i.s_inf * i.s_inf * i.n
        + 2.0 * (i.d_inf + i.b * i.s_inf.powi(3)) * i.n.sqrt())
}

/// Inputs file of the bound report. `b`, `v2` and `C` come either explicitly or
/// from `potential` (with `v2 = ‖V_L‖₂` summed over the cutoff `M`), not both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    pub n: f64,
    pub e: f64,
    pub h_xi: f64,
    pub s_inf: f64,
    pub d_inf: f64,
    pub rho: f64,
    #[serde(rename = "L")]
    pub length: f64,
    /// Initial `S` and `T` feeding the envelopes inside `ω`.
    pub s0: f64,
    pub t0: f64,
    /// Horizon at which `ω` is evaluated.
    pub horizon: f64,
    /// Time of the excitation bound; defaults to the horizon.
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub v2: Option<f64>,
    #[serde(default, rename = "C")]
    pub c: Option<f64>,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default, rename = "M")]
    pub cutoff: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub b: f64,
    pub v2: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub omega: f64,
    pub t: f64,
    pub excitation_bound: f64,
    pub quasi_vacuum_energy_bound: f64,
}

impl BoundRequest {
    pub fn evaluate(&self) -> Result<BoundReport> {
        let (b, v2, c) = match (&self.potential, self.b, self.v2, self.c) {
            (Some(spec), None, None, None) => {
                let model = PotentialModel::from_spec(spec)?;
                let cutoff = self
                    .cutoff
                    .unwrap_or_else(|| self.length.ceil().max(1.0) as usize);
                (
                    model.b(),
                    model.potential_l2(self.length, cutoff)?,
                    model.decay().c,
                )
            }
            (None, Some(b), Some(v2), Some(c)) => (b, v2, c),
            (Some(_), ..) => {
                return Err(invalid(
                    "give either a potential or explicit b, v2 and C, not both",
                ))
            }
            _ => {
                return Err(invalid(
                    "bound inputs need a potential or all of b, v2 and C",
                ))
            }
        };
        if !(c > 0.0) {
            return Err(invalid(format!(
                "decay constant C must be positive, got {c}"
            )));
        }
        let inputs = BoundInputs {
            n: self.n,
            e: self.e,
            h_xi: self.h_xi,
            s_inf: self.s_inf,
            d_inf: self.d_inf,
            b,
            v2,
            rho: self.rho,
            length: self.length,
        };
        let omega = omega_coefficient(self.s0, self.t0, b, v2, c, self.horizon)?;
        let t = self.t.unwrap_or(self.horizon);
        Ok(BoundReport {
            b,
            v2,
            c,
            omega,
            t,
            excitation_bound: excitation_bound(&inputs, omega, t)?,
            quasi_vacuum_energy_bound: quasi_vacuum_energy_bound(&inputs)?,
        })
    }
}
