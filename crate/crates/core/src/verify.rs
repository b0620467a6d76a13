//! Named invariant suites run against a single-run config.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::{envelope_audit, AUDIT_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::evolution::{lifespan_guard, IntegratorConfig, Method, PicardConfig, RhsMethod};
use crate::field::{product_coefficients, wiener2, StateSpec};
use crate::potential::PotentialSpec;
use crate::run::{InitialState, Prepared, RunConfig};
use crate::{CorrelationMethod, SpectralState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Conservation,
    Oracle,
    Envelopes,
    Symmetry,
    Algebra,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Conservation,
        Suite::Oracle,
        Suite::Envelopes,
        Suite::Symmetry,
        Suite::Algebra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Conservation => "conservation",
            Suite::Oracle => "oracle",
            Suite::Envelopes => "envelopes",
            Suite::Symmetry => "symmetry",
            Suite::Algebra => "algebra",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite {s:?}")))
    }
}

/// One measured quantity against its limit. `lower` marks limits that are minima.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub lower: bool,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            limit,
            lower: false,
            pass: value <= limit,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            limit,
            lower: true,
            pass: value >= limit,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let op = if self.lower { ">=" } else { "<=" };
        write!(
            f,
            "{verdict} {}: {:.3e} {op} {:.3e}",
            self.name, self.value, self.limit
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Perturbed condensate on `L = 4, M = 3, ρ = 10`, split-step to `t = 0.006`.
pub fn default_config() -> RunConfig {
    RunConfig {
        potential: PotentialSpec::Gaussian {
            amplitude: 1.0,
            sigma: 1.0,
            c: None,
            delta1: 5.0,
            delta2: 5.0,
        },
        length: 4.0,
        cutoff: 3,
        rho: 10.0,
        initial: InitialState::Family(StateSpec::PerturbedCondensate {
            k0: [0, 0, 0],
            theta: 0.0,
            eps: 0.1,
            s: 6.0,
            seed: 1,
            eps_density_exponent: 0.0,
        }),
        integrator: IntegratorConfig::split(1e-3),
        t_final: 6e-3,
        stride: 1,
        kinetic_tail_c: 1.0,
    }
}

pub fn run_suite(suite: Suite, config: &RunConfig) -> Result<SuiteReport> {
    let prepared = config.prepare()?;
    let checks = match suite {
        Suite::Conservation => conservation(&prepared, config)?,
        Suite::Oracle => oracle(&prepared)?,
        Suite::Envelopes => envelopes(&prepared, config)?,
        Suite::Symmetry => symmetry(&prepared, config)?,
        Suite::Algebra => algebra(&prepared)?,
    };
    Ok(SuiteReport { suite, checks })
}

fn conservation(p: &Prepared, config: &RunConfig) -> Result<Vec<Check>> {
    let (last, records) = p.run(config)?;
    let mass = records
        .iter()
        .map(|r| (r.mass - 1.0).abs())
        .fold(0.0, f64::max);
    let e0 = records[0].energy;
    let drift = records
        .iter()
        .map(|r| ((r.energy - e0) / e0.abs().max(f64::MIN_POSITIVE)).abs())
        .fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most("max |mass - 1|", mass, 1e-9),
        Check::at_most("relative energy drift", drift, 1e-6),
    ];
    if let Some(k0) = single_mode(&p.initial) {
        // A plane wave only turns its phase, at ω_L.
        let elapsed = last.t() - p.initial.t();
        let expect = p.initial.coeff(k0)
            * Complex64::from_polar(1.0, -p.context.reference_frequency() * elapsed);
        checks.push(Check::at_most(
            "plane-wave phase error",
            (last.coeff(k0) - expect).norm(),
            1e-10,
        ));
    }
    Ok(checks)
}

fn single_mode(state: &SpectralState) -> Option<crate::field::Mode> {
    let mut live = state
        .lattice()
        .modes()
        .filter(|&n| state.coeff(n) != Complex64::default());
    let first = live.next()?;
    live.next().is_none().then_some(first)
}

fn oracle(p: &Prepared) -> Result<Vec<Check>> {
    let s = &p.initial;
    let fft = p.system.rhs(s, RhsMethod::Fft);
    let direct = p.system.rhs(s, RhsMethod::Direct);
    let rhs = fft
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let beta_fft = s.autocorrelation(CorrelationMethod::Fft);
    let beta_direct = s.autocorrelation(CorrelationMethod::Direct);
    let beta = beta_fft
        .values()
        .iter()
        .zip(beta_direct.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let t = 0.1 * lifespan_guard(s, p.system.b()).guard;
    let picard = p.system.picard_solve(s, t, &PicardConfig::default())?;
    let split = IntegratorConfig {
        method: Method::SplitStrang,
        dt: t / 256.0,
        picard: PicardConfig::default(),
        dealias: p.system.dealias(),
    };
    let fine = p.system.evolve(s, t, &split, 256)?;
    Ok(vec![
        Check::at_most("direct vs fft rhs", rhs, 1e-10),
        Check::at_most("direct vs fft auto-correlation", beta, 1e-10),
        Check::at_most(
            "picard vs split at 0.1 guard (l2)",
            picard.l2_distance(fine.last()),
            1e-7,
        ),
    ])
}

fn envelopes(p: &Prepared, config: &RunConfig) -> Result<Vec<Check>> {
    let (_, records) = p.run(config)?;
    let audit = envelope_audit(&records);
    // Raw margins may dip by the boundary-shell tail before the audit flags them.
    let slack = |tail: fn(&crate::DiagnosticsRecord) -> f64| {
        records.iter().map(tail).fold(0.0, f64::max) + AUDIT_TOLERANCE
    };
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("flagged records", audit.flags.len() as f64, 0.0),
        Check::at_least(
            "min S margin",
            min(&audit.s_margin),
            -slack(|r| r.boundary_s_tail),
        ),
        Check::at_least(
            "min T margin",
            min(&audit.t_margin),
            -slack(|r| r.boundary_t_tail),
        ),
        Check::at_least("audited records", audit.audited as f64, 1.0),
    ])
}

fn symmetry(p: &Prepared, config: &RunConfig) -> Result<Vec<Check>> {
    let forward = p
        .system
        .evolve(&p.initial, config.t_final, &config.integrator, usize::MAX)?;
    let reversed = forward.last().conjugate_reflect();
    let back = p
        .system
        .evolve(&reversed, config.t_final, &config.integrator, usize::MAX)?;
    let returned = back.last().conjugate_reflect();
    let d = returned
        .with_coeffs(p.initial.t(), returned.coeffs().to_vec())
        .l2_distance(&p.initial);
    Ok(vec![Check::at_most(
        "time-reversal round trip (l2)",
        d,
        1e-8,
    )])
}

fn algebra(p: &Prepared) -> Result<Vec<Check>> {
    let s = &p.initial;
    let lat = *s.lattice();
    let beta = s.autocorrelation(CorrelationMethod::Fft);
    let mut symmetry: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for k in beta.lattice().modes() {
        let v = beta.get(k);
        symmetry = symmetry.max((beta.get([-k[0], -k[1], -k[2]]) - v.conj()).norm());
        excess = excess.max(v.norm() - 1.0);
    }
    let volume = lat.length().powi(3);
    let fourth = s.to_physical(2)?.integral_abs_pow(4) / (s.rho() * volume);
    let quartic = (s.rho() * beta.sum_sq() - fourth).abs() / fourth;

    let g = s.conjugate_reflect();
    let fg = product_coefficients(&lat, s.coeffs(), g.coeffs())?;
    let product = wiener2(&lat.difference(), &fg)
        - 4.0 / 3.0 * wiener2(&lat, s.coeffs()) * wiener2(&lat, g.coeffs());
    let sup = s.to_physical(1)?.sup_norm() - s.rho().sqrt() * s.s_sum();
    Ok(vec![
        Check::at_most("|beta(0) - 1|", (beta.get([0, 0, 0]) - 1.0).norm(), 1e-12),
        Check::at_most("|beta(-k) - conj beta(k)|", symmetry, 1e-12),
        Check::at_most("max |beta| - 1", excess, 1e-12),
        Check::at_most("quartic identity (relative)", quartic, 1e-10),
        Check::at_most("||fg|| - 4/3 ||f|| ||g||", product, 1e-9),
        Check::at_most("sup|Psi| - sqrt(rho) S", sup, 1e-9),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_on_the_default_config() {
        let config = default_config();
        for suite in Suite::ALL {
            let report = run_suite(suite, &config).unwrap();
            assert!(report.pass(), "{suite}: {:?}", report.checks);
        }
    }

    #[test]
    fn plane_wave_conservation_includes_the_phase() {
        let mut config = default_config();
        config.initial = InitialState::Family(StateSpec::PlaneWave {
            k0: [1, 0, 0],
            theta: 0.2,
        });
        let report = run_suite(Suite::Conservation, &config).unwrap();
        assert_eq!(report.checks.len(), 3);
        assert!(report.pass());
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }
}
