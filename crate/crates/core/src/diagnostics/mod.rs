//! Scalar observables of spectral states and their comparison with the
//! closed-form envelopes.

mod audit;
mod bounds;

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

pub use audit::{
    assumption_check, envelope_audit, plane_wave_comparison, AssumptionReport, AuditFlag,
    Comparison, EnvelopeAudit, AUDIT_TOLERANCE,
};
pub use bounds::{
    blow_up_time, excitation_bound, mass_envelope, omega_coefficient, quasi_vacuum_energy_bound,
    s_envelope, t_envelope, BoundInputs, BoundReport, BoundRequest,
};

use crate::error::Result;
use crate::evolution::HartreeSystem;
use crate::field::{
    format_mode, norm_sq, AutoCorrelation, CorrelationMethod, Mode, SpectralState, TorusLattice,
};
use crate::potential::PotentialModel;

/// Column names of the trajectory CSV, in order.
pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "mass",
    "energy",
    "energy_per_particle",
    "S",
    "T",
    "k_star",
    "condensate_fraction",
    "l1_dev",
    "l2_dev",
    "tail_half_M",
    "beta_gap",
    "s_envelope",
    "t_envelope",
    "u_mass_sq",
    "u_mass_envelope",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub energy_per_particle: f64,
    #[serde(rename = "S")]
    pub s_sum: f64,
    #[serde(rename = "T")]
    pub t_sum: f64,
    pub k_star: Mode,
    pub condensate_fraction: f64,
    pub l1_dev: f64,
    pub l2_dev: f64,
    /// `Σ_{|m| > ⌊M/2⌋} |α_m|`.
    pub tail_half_m: f64,
    /// `Σ_{|m| > cL} (4π²|m|²/L²)|α_m|` at the context's `c`.
    pub kinetic_tail: f64,
    pub beta_gap: f64,
    /// NaN past the envelope blow-up time.
    pub s_envelope: f64,
    pub t_envelope: f64,
    pub u_mass_sq: f64,
    pub u_grad_sq: f64,
    pub u_mass_envelope: f64,
    /// `Σ|α|` and `Σ(4π²|m|²/L²)|α|` over the outermost shell `|m|_∞ = M`,
    /// the allowance for what the truncation discards.
    pub boundary_s_tail: f64,
    pub boundary_t_tail: f64,
}

/// `E = ρL³ Σ_n [(4π²|n|²/L²)|α_n|² + ½ V̂(2πn/L)|β(n)|²]`.
pub fn energy(state: &SpectralState, potential: &PotentialModel) -> Result<f64> {
    let diff = state.lattice().difference();
    let samples = potential.lattice_samples(&diff)?;
    let beta = state.autocorrelation(CorrelationMethod::Fft);
    Ok(energy_from(state, &beta, &samples))
}

pub(crate) fn energy_from(
    state: &SpectralState,
    beta: &AutoCorrelation,
    interaction: &[f64],
) -> f64 {
    let lat = state.lattice();
    let volume = lat.length().powi(3);
    let interaction_sum = beta
        .lattice()
        .ordered_sum(|i| 0.5 * interaction[i] * beta.values()[i].norm_sqr());
    state.rho() * volume * (state.kinetic_per_particle() + interaction_sum)
}

/// `Σ_{|m| > radius} |α_m|` with the Euclidean `|m|`.
pub fn tail(state: &SpectralState, radius: f64) -> f64 {
    let lat = state.lattice();
    let r2 = radius * radius;
    lat.ordered_sum(|i| {
        if norm_sq(lat.mode(i)) as f64 > r2 {
            state.coeffs()[i].norm()
        } else {
            0.0
        }
    })
}

/// `Σ_{|m| > cL} (4π²|m|²/L²)|α_m|`.
pub fn kinetic_tail(state: &SpectralState, c: f64) -> f64 {
    let lat = state.lattice();
    let r = c * lat.length();
    lat.ordered_sum(|i| {
        let m = lat.mode(i);
        if norm_sq(m) as f64 > r * r {
            lat.kinetic(m) * state.coeffs()[i].norm()
        } else {
            0.0
        }
    })
}

fn boundary_tails(state: &SpectralState) -> (f64, f64) {
    let lat = state.lattice();
    let edge = lat.cutoff() as i64;
    let on_edge = |m: Mode| m.iter().any(|c| c.abs() == edge);
    let s = lat.ordered_sum(|i| {
        if on_edge(lat.mode(i)) {
            state.coeffs()[i].norm()
        } else {
            0.0
        }
    });
    let t = lat.ordered_sum(|i| {
        let m = lat.mode(i);
        if on_edge(m) {
            lat.kinetic(m) * state.coeffs()[i].norm()
        } else {
            0.0
        }
    });
    (s, t)
}

/// Everything a trajectory's records are measured against: initial sums, the
/// plane-wave reference, and the potential data.
#[derive(Clone, Debug)]
pub struct DiagnosticsContext {
    pub b: f64,
    pub decay_c: f64,
    pub s0: f64,
    pub t0: f64,
    pub start: f64,
    pub k0: Mode,
    pub theta: f64,
    pub u0_mass_sq: f64,
    pub kinetic_tail_c: f64,
    interaction: Vec<f64>,
    lattice: TorusLattice,
}

impl DiagnosticsContext {
    pub fn new(
        system: &HartreeSystem,
        decay_c: f64,
        initial: &SpectralState,
        k0: Mode,
        theta: f64,
    ) -> Self {
        let mut ctx = Self {
            b: system.b(),
            decay_c,
            s0: initial.s_sum(),
            t0: initial.t_sum(),
            start: initial.t(),
            k0,
            theta,
            u0_mass_sq: 0.0,
            kinetic_tail_c: 1.0,
            interaction: system.interaction().to_vec(),
            lattice: *system.lattice(),
        };
        ctx.u0_mass_sq = ctx.comparison(initial).0;
        ctx
    }

    pub fn with_kinetic_tail_c(mut self, c: f64) -> Self {
        self.kinetic_tail_c = c;
        self
    }

    /// `ω_L = 4π²|k0|²/L² + b`.
    pub fn reference_frequency(&self) -> f64 {
        self.lattice.kinetic(self.k0) + self.b
    }

    /// `(‖u‖²/(ρL³), ‖∇u‖²/(ρL³))` for `u = Ψ − Φ` with the plane wave `Φ`.
    pub fn comparison(&self, state: &SpectralState) -> (f64, f64) {
        let lat = state.lattice();
        let elapsed = state.t() - self.start;
        let phase = Complex64::from_polar(1.0, self.theta - self.reference_frequency() * elapsed);
        let centre = lat.index(self.k0);
        let diff = |i: usize| {
            let a = state.coeffs()[i];
            if Some(i) == centre {
                (a - phase).norm_sqr()
            } else {
                a.norm_sqr()
            }
        };
        let mass = lat.ordered_sum(diff);
        let grad = lat.ordered_sum(|i| lat.kinetic(lat.mode(i)) * diff(i));
        (mass, grad)
    }

    pub fn record(&self, state: &SpectralState) -> DiagnosticsRecord {
        let lat = state.lattice();
        let beta = state.autocorrelation(CorrelationMethod::Fft);
        let energy = energy_from(state, &beta, &self.interaction);
        let (k_star, a_star) = state.dominant_mode();
        let aligned = Complex64::from_polar(1.0, a_star.arg());
        let star = lat.index(k_star).expect("dominant mode is on the lattice");
        let l1_dev = lat.ordered_sum(|i| {
            let a = state.coeffs()[i];
            if i == star {
                (a - aligned).norm()
            } else {
                a.norm()
            }
        });
        let l2_dev = lat
            .ordered_sum(|i| {
                let a = state.coeffs()[i];
                if i == star {
                    (a - aligned).norm_sqr()
                } else {
                    a.norm_sqr()
                }
            })
            .sqrt();
        let elapsed = state.t() - self.start;
        let (u_mass_sq, u_grad_sq) = self.comparison(state);
        let (boundary_s_tail, boundary_t_tail) = boundary_tails(state);
        DiagnosticsRecord {
            t: state.t(),
            mass: state.mass(),
            energy,
            energy_per_particle: energy / (state.rho() * lat.length().powi(3)),
            s_sum: state.s_sum(),
            t_sum: state.t_sum(),
            k_star,
            condensate_fraction: a_star.norm_sqr(),
            l1_dev,
            l2_dev,
            tail_half_m: tail(state, (lat.cutoff() / 2) as f64),
            kinetic_tail: kinetic_tail(state, self.kinetic_tail_c),
            beta_gap: beta.gap(),
            s_envelope: s_envelope(self.s0, self.b, elapsed).unwrap_or(f64::NAN),
            t_envelope: t_envelope(self.s0, self.t0, self.b, self.decay_c, elapsed)
                .unwrap_or(f64::NAN),
            u_mass_sq,
            u_grad_sq,
            u_mass_envelope: mass_envelope(self.u0_mass_sq, self.s0, self.b, elapsed)
                .unwrap_or(f64::NAN),
            boundary_s_tail,
            boundary_t_tail,
        }
    }
}

/// 17 significant digits, locale-free.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streams records as the trajectory CSV.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(CSV_COLUMNS)?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let f = format_float;
        self.writer.write_record([
            f(r.t),
            f(r.mass),
            f(r.energy),
            f(r.energy_per_particle),
            f(r.s_sum),
            f(r.t_sum),
            format_mode(r.k_star),
            f(r.condensate_fraction),
            f(r.l1_dev),
            f(r.l2_dev),
            f(r.tail_half_m),
            f(r.beta_gap),
            f(r.s_envelope),
            f(r.t_envelope),
            f(r.u_mass_sq),
            f(r.u_mass_envelope),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.writer.flush().map_err(csv::Error::from)?;
        self.writer
            .into_inner()
            .map_err(|e| crate::error::Error::Csv(csv::Error::from(e.into_error())))
    }
}

pub fn write_csv<W: Write>(inner: W, records: &[DiagnosticsRecord]) -> Result<W> {
    let mut sink = CsvSink::new(inner)?;
    for r in records {
        sink.write(r)?;
    }
    sink.finish()
}

/// Evolves `state` and returns the diagnostics stream.
pub fn run_with_diagnostics(
    system: &HartreeSystem,
    context: &DiagnosticsContext,
    state: &SpectralState,
    t_final: f64,
    config: &crate::evolution::IntegratorConfig,
    stride: usize,
) -> Result<(SpectralState, Vec<DiagnosticsRecord>)> {
    let mut records = Vec::new();
    let last = system.evolve_with(state, t_final, config, stride, |s| {
        records.push(context.record(s));
        Ok(())
    })?;
    Ok((last, records))
}
