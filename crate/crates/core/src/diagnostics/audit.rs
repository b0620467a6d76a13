use serde::Serialize;

use super::bounds::mass_envelope;
use super::{kinetic_tail, tail, DiagnosticsRecord};
use crate::error::{invalid, Result};
use crate::field::{Mode, SpectralState};

/// Slack allowed on top of the boundary-shell tail before a margin is flagged.
pub const AUDIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditFlag {
    pub t: f64,
    pub quantity: &'static str,
    pub margin: f64,
    pub tolerance: f64,
}

/// Margins `envelope − observed`, raw and with the truncation tail added to the
/// observed value. Records past the blow-up time are skipped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeAudit {
    pub pass: bool,
    pub audited: usize,
    pub skipped: usize,
    pub times: Vec<f64>,
    pub s_margin: Vec<f64>,
    pub s_margin_corrected: Vec<f64>,
    pub t_margin: Vec<f64>,
    pub t_margin_corrected: Vec<f64>,
    pub u_mass_margin: Vec<f64>,
    pub flags: Vec<AuditFlag>,
}

pub fn envelope_audit(records: &[DiagnosticsRecord]) -> EnvelopeAudit {
    let mut audit = EnvelopeAudit {
        pass: true,
        audited: 0,
        skipped: 0,
        times: Vec::new(),
        s_margin: Vec::new(),
        s_margin_corrected: Vec::new(),
        t_margin: Vec::new(),
        t_margin_corrected: Vec::new(),
        u_mass_margin: Vec::new(),
        flags: Vec::new(),
    };
    for r in records {
        if !(r.s_envelope.is_finite() && r.t_envelope.is_finite()) {
            audit.skipped += 1;
            continue;
        }
        audit.audited += 1;
        let s_margin = r.s_envelope - r.s_sum;
        let t_margin = r.t_envelope - r.t_sum;
        let u_margin = r.u_mass_envelope - r.u_mass_sq;
        audit.times.push(r.t);
        audit.s_margin.push(s_margin);
        audit.s_margin_corrected.push(s_margin - r.boundary_s_tail);
        audit.t_margin.push(t_margin);
        audit.t_margin_corrected.push(t_margin - r.boundary_t_tail);
        audit.u_mass_margin.push(u_margin);

        let checks = [
            ("S", s_margin, AUDIT_TOLERANCE + r.boundary_s_tail),
            ("T", t_margin, AUDIT_TOLERANCE + r.boundary_t_tail),
            ("u_mass", u_margin, 1e-12 + 1e-9 * r.u_mass_envelope.abs()),
        ];
        for (quantity, margin, tolerance) in checks {
            if margin.is_nan() || margin < -tolerance {
                audit.flags.push(AuditFlag {
                    t: r.t,
                    quantity,
                    margin,
                    tolerance,
                });
            }
        }
    }
    audit.pass = audit.flags.is_empty();
    audit
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `(M', Σ_{|m|>M'} |α_m|)` per requested radius.
    pub tails: Vec<(f64, f64)>,
    pub tails_non_increasing: bool,
    pub c: f64,
    pub kinetic_tail: f64,
}

pub fn assumption_check(state: &SpectralState, radii: &[f64], c: f64) -> Result<AssumptionReport> {
    if !(c > 0.0) {
        return Err(invalid(format!(
            "kinetic tail constant must be positive, got {c}"
        )));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tails: Vec<(f64, f64)> = sorted.iter().map(|&r| (r, tail(state, r))).collect();
    let tails_non_increasing = tails.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(AssumptionReport {
        tails,
        tails_non_increasing,
        c,
        kinetic_tail: kinetic_tail(state, c),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub t: f64,
    pub u_mass_sq: f64,
    pub u_grad_sq: f64,
    pub mass_envelope: f64,
}

/// `u = Ψ − Φ` against the plane wave `Φ = √ρ e^{iθ − iω_L t} e_{k0}` for each state,
/// with `t` measured from the first state.
pub fn plane_wave_comparison(
    states: &[SpectralState],
    k0: Mode,
    theta: f64,
    b: f64,
) -> Result<Vec<Comparison>> {
    let first = states
        .first()
        .ok_or_else(|| invalid("comparison needs at least one state"))?;
    if !first.lattice().contains(k0) {
        return Err(invalid(format!(
            "reference mode {k0:?} lies outside the cutoff"
        )));
    }
    let s0 = first.s_sum();
    let ctx = Reference {
        k0,
        theta,
        omega: first.lattice().kinetic(k0) + b,
        start: first.t(),
    };
    let u0 = ctx.distance(first).0;
    states
        .iter()
        .map(|s| {
            let (u_mass_sq, u_grad_sq) = ctx.distance(s);
            let t = s.t() - ctx.start;
            Ok(Comparison {
                t,
                u_mass_sq,
                u_grad_sq,
                mass_envelope: mass_envelope(u0, s0, b, t)?,
            })
        })
        .collect()
}

struct Reference {
    k0: Mode,
    theta: f64,
    omega: f64,
    start: f64,
}

impl Reference {
    fn distance(&self, s: &SpectralState) -> (f64, f64) {
        let lat = s.lattice();
        let phase =
            num_complex::Complex64::from_polar(1.0, self.theta - self.omega * (s.t() - self.start));
        let centre = lat.index(self.k0);
        let d = |i: usize| {
            let a = s.coeffs()[i];
            if Some(i) == centre {
                (a - phase).norm_sqr()
            } else {
                a.norm_sqr()
            }
        };
        (
            lat.ordered_sum(d),
            lat.ordered_sum(|i| lat.kinetic(lat.mode(i)) * d(i)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_state, StateSpec, TorusLattice};
    use std::f64::consts::PI;

    fn record(t: f64, s: f64, env: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            mass: 1.0,
            energy: 0.0,
            energy_per_particle: 0.0,
            s_sum: s,
            t_sum: 0.0,
            k_star: [0, 0, 0],
            condensate_fraction: 1.0,
            l1_dev: 0.0,
            l2_dev: 0.0,
            tail_half_m: 0.0,
            kinetic_tail: 0.0,
            beta_gap: 0.0,
            s_envelope: env,
            t_envelope: 1.0,
            u_mass_sq: 0.0,
            u_grad_sq: 0.0,
            u_mass_envelope: 0.0,
            boundary_s_tail: 0.0,
            boundary_t_tail: 0.0,
        }
    }

    #[test]
    fn injected_violation_is_flagged() {
        let ok = envelope_audit(&[record(0.0, 1.0, 1.0), record(0.1, 1.0, 1.2)]);
        assert!(ok.pass);
        assert_eq!(ok.audited, 2);
        let bad = envelope_audit(&[record(0.0, 1.0, 1.0), record(0.1, 1.5, 1.2)]);
        assert!(!bad.pass);
        assert_eq!(bad.flags.len(), 1);
        assert_eq!(bad.flags[0].quantity, "S");
        let skipped = envelope_audit(&[record(0.0, 1.0, f64::NAN)]);
        assert_eq!(skipped.skipped, 1);
        assert!(skipped.pass);
    }

    #[test]
    fn assumption_tails() {
        let lat = TorusLattice::new(4.0, 4).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [1, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        let rep = assumption_check(&s, &[2.0, 1.5, 3.0], 0.1).unwrap();
        assert!(rep.tails.iter().all(|&(_, t)| t == 0.0));
        assert!(rep.tails_non_increasing);
        assert!((rep.kinetic_tail - 4.0 * PI * PI / 16.0).abs() < 1e-14);
        assert!(assumption_check(&s, &[1.0], 0.0).is_err());
    }

    #[test]
    fn phase_mismatch_doubles_distance() {
        let lat = TorusLattice::new(4.0, 1).unwrap();
        let s = make_state(
            &StateSpec::PlaneWave {
                k0: [0, 0, 0],
                theta: 0.0,
            },
            lat,
            1.0,
        )
        .unwrap();
        let c = plane_wave_comparison(std::slice::from_ref(&s), [0, 0, 0], PI, 15.0).unwrap();
        assert!((c[0].u_mass_sq - 4.0).abs() < 1e-14);
        let same = plane_wave_comparison(std::slice::from_ref(&s), [0, 0, 0], 0.0, 15.0).unwrap();
        assert_eq!(same[0].u_mass_sq, 0.0);
        assert_eq!(same[0].mass_envelope, 0.0);
    }
}
