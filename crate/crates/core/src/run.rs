//! Single simulation runs described by a JSON config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{run_with_diagnostics, DiagnosticsContext, DiagnosticsRecord};
use crate::error::{invalid, Error, Result};
use crate::evolution::{HartreeSystem, IntegratorConfig};
use crate::field::{make_state, read_snapshot, Mode, SpectralState, StateSpec, TorusLattice};
use crate::potential::{PotentialModel, PotentialSpec};

/// Initial data: a built-in family or a snapshot file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Family(StateSpec),
    Snapshot { snapshot: PathBuf },
}

fn one() -> usize {
    1
}

fn unit_c() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub cutoff: usize,
    pub rho: f64,
    pub initial: InitialState,
    pub integrator: IntegratorConfig,
    pub t_final: f64,
    #[serde(default = "one")]
    pub stride: usize,
    /// `c` of the kinetic-tail column.
    #[serde(default = "unit_c")]
    pub kinetic_tail_c: f64,
}

/// A prepared run: model, system and initial state with its reference plane wave.
pub struct Prepared {
    pub potential: PotentialModel,
    pub system: HartreeSystem,
    pub initial: SpectralState,
    pub family: String,
    pub seed: Option<u64>,
    pub reference: (Mode, f64),
    pub context: DiagnosticsContext,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text)?;
        // Snapshot paths are relative to the config file.
        if let InitialState::Snapshot { snapshot } = &mut config.initial {
            if snapshot.is_relative() {
                if let Some(dir) = path.parent() {
                    *snapshot = dir.join(&*snapshot);
                }
            }
        }
        Ok(config)
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let potential = PotentialModel::from_spec(&self.potential)?;
        self.prepare_with(potential)
    }

    pub fn prepare_with(&self, potential: PotentialModel) -> Result<Prepared> {
        self.integrator.validate()?;
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid("t_final must be positive"));
        }
        let lattice = TorusLattice::new(self.length, self.cutoff)?;
        let (initial, family, seed, reference) = match &self.initial {
            InitialState::Family(spec) => (
                make_state(spec, lattice, self.rho)?,
                spec.family_name().to_owned(),
                spec.seed(),
                spec.reference(),
            ),
            InitialState::Snapshot { snapshot } => {
                let (state, header) = read_snapshot(snapshot)?;
                if *state.lattice() != lattice || state.rho() != self.rho {
                    return Err(invalid(
                        "snapshot geometry does not match L, M and rho of the config",
                    ));
                }
                let (k, a) = state.dominant_mode();
                (state, header.family, header.seed, (k, a.arg()))
            }
        };
        let system = HartreeSystem::new(&potential, lattice, self.integrator.dealias)?;
        let context = DiagnosticsContext::new(
            &system,
            potential.decay().c,
            &initial,
            reference.0,
            reference.1,
        )
        .with_kinetic_tail_c(self.kinetic_tail_c);
        Ok(Prepared {
            potential,
            system,
            initial,
            family,
            seed,
            reference,
            context,
        })
    }
}

impl Prepared {
    pub fn run(&self, config: &RunConfig) -> Result<(SpectralState, Vec<DiagnosticsRecord>)> {
        run_with_diagnostics(
            &self.system,
            &self.context,
            &self.initial,
            config.t_final,
            &config.integrator,
            config.stride,
        )
    }
}
