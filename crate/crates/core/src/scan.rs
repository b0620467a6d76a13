//! Thermodynamic-limit ladders: `L` grows at fixed `ρ`, then `ρ` grows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{envelope_audit, format_float, CsvSink, DiagnosticsContext};
use crate::error::{invalid, Error, Result};
use crate::evolution::{HartreeSystem, IntegratorConfig, Method, PicardConfig};
use crate::field::{make_state, StateSpec, TorusLattice};
use crate::potential::{PotentialModel, PotentialSpec};

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "HARTREE_WORKERS";

fn unit() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// `M = max(min, ⌈κL⌉)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffRule {
    #[serde(default = "unit")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub min: usize,
}

impl Default for CutoffRule {
    fn default() -> Self {
        Self { kappa: 1.0, min: 1 }
    }
}

impl CutoffRule {
    pub fn cutoff(&self, length: f64) -> usize {
        ((self.kappa * length).ceil() as usize).max(self.min).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPlan {
    pub potential: PotentialSpec,
    pub rhos: Vec<f64>,
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub cutoff: CutoffRule,
    pub initial: StateSpec,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default = "unit")]
    pub kinetic_tail_c: f64,
    /// Directory for one trajectory CSV per point; none when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<PathBuf>,
}

impl ScanPlan {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let ascending = |v: &[f64]| {
            !v.is_empty()
                && v.iter().all(|x| x.is_finite() && *x > 0.0)
                && v.windows(2).all(|w| w[1] > w[0])
        };
        if !ascending(&self.rhos) {
            return Err(invalid(
                "rhos must be non-empty, positive and strictly ascending",
            ));
        }
        if !ascending(&self.lengths) {
            return Err(invalid(
                "lengths must be non-empty, positive and strictly ascending",
            ));
        }
        if !(self.cutoff.kappa > 0.0) {
            return Err(invalid("cutoff kappa must be positive"));
        }
        if self.stride == 0 {
            return Err(invalid("stride must be at least 1"));
        }
        if !(self.t_final > 0.0) {
            return Err(invalid("t_final must be positive"));
        }
        self.integrator().validate()
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            method: self.method,
            dt: self.dt,
            picard: self.picard,
            dealias: self.dealias,
        }
    }

    /// `(ρ, L)` in ρ-major order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rhos
            .iter()
            .flat_map(|&r| self.lengths.iter().map(move |&l| (r, l)))
            .collect()
    }

    /// Seed of point `index`: one draw from stream `index` of the master generator.
    pub fn point_seed(&self, index: usize) -> u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index as u64);
        rng.next_u64()
    }
}

/// Columns of the scan table, in order.
pub const SCAN_COLUMNS: [&str; 27] = [
    "rho",
    "L",
    "M",
    "seed",
    "n_particles",
    "status",
    "t_final",
    "mass",
    "energy_per_particle",
    "energy_gap",
    "S",
    "T",
    "condensate_fraction",
    "l1_dev",
    "l2_dev",
    "tail_half_M",
    "kinetic_tail",
    "beta_gap",
    "max_S",
    "max_T",
    "max_beta_gap",
    "min_condensate_fraction",
    "max_mass_drift",
    "min_s_margin",
    "min_t_margin",
    "envelope_pass",
    "runtime_s",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanRecord {
    pub rho: f64,
    pub length: f64,
    pub cutoff: usize,
    pub seed: u64,
    /// `⌈ρL³⌉`, for reference only.
    pub n_particles: f64,
    pub error: Option<String>,
    pub t_final: f64,
    pub mass: f64,
    pub energy_per_particle: f64,
    /// `|E/(ρL³) − b/2|`.
    pub energy_gap: f64,
    pub s_sum: f64,
    pub t_sum: f64,
    pub condensate_fraction: f64,
    pub l1_dev: f64,
    pub l2_dev: f64,
    pub tail_half_m: f64,
    pub kinetic_tail: f64,
    pub beta_gap: f64,
    pub max_s: f64,
    pub max_t: f64,
    pub max_beta_gap: f64,
    pub min_condensate_fraction: f64,
    pub max_mass_drift: f64,
    pub min_s_margin: f64,
    pub min_t_margin: f64,
    pub envelope_pass: bool,
    pub runtime_s: f64,
}

impl ScanRecord {
    /// Numeric column by name; `None` for unknown names.
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "rho" => self.rho,
            "L" => self.length,
            "M" => self.cutoff as f64,
            "n_particles" => self.n_particles,
            "t_final" => self.t_final,
            "mass" => self.mass,
            "energy_per_particle" => self.energy_per_particle,
            "energy_gap" => self.energy_gap,
            "S" => self.s_sum,
            "T" => self.t_sum,
            "condensate_fraction" => self.condensate_fraction,
            "l1_dev" => self.l1_dev,
            "l2_dev" => self.l2_dev,
            "tail_half_M" => self.tail_half_m,
            "kinetic_tail" => self.kinetic_tail,
            "beta_gap" => self.beta_gap,
            "max_S" => self.max_s,
            "max_T" => self.max_t,
            "max_beta_gap" => self.max_beta_gap,
            "min_condensate_fraction" => self.min_condensate_fraction,
            "max_mass_drift" => self.max_mass_drift,
            "min_s_margin" => self.min_s_margin,
            "min_t_margin" => self.min_t_margin,
            "runtime_s" => self.runtime_s,
            _ => return None,
        })
    }

    fn csv_row(&self) -> Vec<String> {
        let f = format_float;
        vec![
            f(self.rho),
            f(self.length),
            self.cutoff.to_string(),
            self.seed.to_string(),
            f(self.n_particles),
            self.error
                .clone()
                .map_or_else(|| "ok".to_owned(), |e| format!("error: {e}")),
            f(self.t_final),
            f(self.mass),
            f(self.energy_per_particle),
            f(self.energy_gap),
            f(self.s_sum),
            f(self.t_sum),
            f(self.condensate_fraction),
            f(self.l1_dev),
            f(self.l2_dev),
            f(self.tail_half_m),
            f(self.kinetic_tail),
            f(self.beta_gap),
            f(self.max_s),
            f(self.max_t),
            f(self.max_beta_gap),
            f(self.min_condensate_fraction),
            f(self.max_mass_drift),
            f(self.min_s_margin),
            f(self.min_t_margin),
            self.envelope_pass.to_string(),
            format!("{:.3}", self.runtime_s),
        ]
    }
}

pub fn write_table<W: Write>(inner: W, rows: &[ScanRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(inner);
    w.write_record(SCAN_COLUMNS)?;
    for r in rows {
        w.write_record(r.csv_row())?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Trajectory CSV path of point `index` inside `dir`.
pub fn trajectory_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("point_{index:03}.csv"))
}

/// Runs every point on a pool of `workers` threads. Rows come back in ρ-major
/// order whatever the completion order; a failing point fills its `error`.
pub fn run_scan(plan: &ScanPlan, workers: usize) -> Result<Vec<ScanRecord>> {
    plan.validate()?;
    let potential = PotentialModel::from_spec(&plan.potential)?;
    if let Some(dir) = &plan.trajectories {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let points = plan.points();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ScanRecord>>> = Mutex::new(vec![None; points.len()]);
    let workers = workers.clamp(1, points.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= points.len() {
                    break;
                }
                let (rho, length) = points[index];
                let record = run_point(plan, &potential, index, rho, length);
                slots.lock().unwrap_or_else(|e| e.into_inner())[index] = Some(record);
            });
        }
    });
    Ok(slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every point produces a record"))
        .collect())
}

fn run_point(
    plan: &ScanPlan,
    potential: &PotentialModel,
    index: usize,
    rho: f64,
    length: f64,
) -> ScanRecord {
    let started = Instant::now();
    let cutoff = plan.cutoff.cutoff(length);
    let seed = plan.point_seed(index);
    let mut record = ScanRecord {
        rho,
        length,
        cutoff,
        seed,
        n_particles: (rho * length.powi(3)).ceil(),
        ..ScanRecord::default()
    };
    if let Err(e) = fill_point(plan, potential, index, &mut record) {
        record.error = Some(e.to_string());
    }
    record.runtime_s = started.elapsed().as_secs_f64();
    record
}

fn fill_point(
    plan: &ScanPlan,
    potential: &PotentialModel,
    index: usize,
    record: &mut ScanRecord,
) -> Result<()> {
    let lattice = TorusLattice::new(record.length, record.cutoff)?;
    let spec = plan.initial.with_seed(record.seed);
    let initial = make_state(&spec, lattice, record.rho)?;
    let system = HartreeSystem::new(potential, lattice, plan.dealias)?;
    let (k0, theta) = spec.reference();
    let context = DiagnosticsContext::new(&system, potential.decay().c, &initial, k0, theta)
        .with_kinetic_tail_c(plan.kinetic_tail_c);

    let mut sink = match &plan.trajectories {
        Some(dir) => {
            let path = trajectory_path(dir, index);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            Some(CsvSink::new(BufWriter::new(file))?)
        }
        None => None,
    };
    let mut records = Vec::new();
    system.evolve_with(
        &initial,
        plan.t_final,
        &plan.integrator(),
        plan.stride,
        |s| {
            let r = context.record(s);
            if let Some(sink) = sink.as_mut() {
                sink.write(&r)?;
            }
            records.push(r);
            Ok(())
        },
    )?;
    if let Some(sink) = sink {
        sink.finish()?
            .flush()
            .map_err(|e| Error::io(PathBuf::from("trajectory"), e))?;
    }

    let last = records.last().expect("initial record is always emitted");
    let audit = envelope_audit(&records);
    let fold_max = |f: fn(&crate::diagnostics::DiagnosticsRecord) -> f64| {
        records.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    };
    record.t_final = last.t;
    record.mass = last.mass;
    record.energy_per_particle = last.energy_per_particle;
    record.energy_gap = (last.energy_per_particle - potential.b() / 2.0).abs();
    record.s_sum = last.s_sum;
    record.t_sum = last.t_sum;
    record.condensate_fraction = last.condensate_fraction;
    record.l1_dev = last.l1_dev;
    record.l2_dev = last.l2_dev;
    record.tail_half_m = last.tail_half_m;
    record.kinetic_tail = last.kinetic_tail;
    record.beta_gap = last.beta_gap;
    record.max_s = fold_max(|r| r.s_sum);
    record.max_t = fold_max(|r| r.t_sum);
    record.max_beta_gap = fold_max(|r| r.beta_gap);
    record.min_condensate_fraction = records
        .iter()
        .map(|r| r.condensate_fraction)
        .fold(f64::INFINITY, f64::min);
    record.max_mass_drift = fold_max(|r| (r.mass - 1.0).abs());
    record.min_s_margin = audit.s_margin.iter().copied().fold(f64::INFINITY, f64::min);
    record.min_t_margin = audit.t_margin.iter().copied().fold(f64::INFINITY, f64::min);
    record.envelope_pass = audit.pass;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitProxy {
    pub rho: f64,
    /// Largest `L` with a successful row.
    pub length: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub column: String,
    pub proxies: Vec<LimitProxy>,
    /// `flat`, `decreasing`, `increasing`, `non-monotone` or `insufficient`.
    pub trend: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitSummary {
    pub columns: Vec<ColumnSummary>,
    pub warnings: Vec<String>,
}

/// Default columns tracked by [`iterated_limit_summary`].
pub const MONITORED: [&str; 5] = [
    "beta_gap",
    "energy_gap",
    "condensate_fraction",
    "l1_dev",
    "kinetic_tail",
];

/// Value at the largest `L` per `ρ` and the direction it moves along the `ρ` ladder.
pub fn iterated_limit_summary(rows: &[ScanRecord], columns: &[&str]) -> LimitSummary {
    let mut rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    let mut warnings = Vec::new();
    for &rho in &rhos {
        let count = rows.iter().filter(|r| r.rho == rho).count();
        if count < 2 {
            warnings.push(format!(
                "rho = {rho} has {count} L value(s); the L trend is not resolved"
            ));
        }
    }
    let columns = columns
        .iter()
        .map(|&name| {
            let proxies: Vec<LimitProxy> = rhos
                .iter()
                .filter_map(|&rho| {
                    rows.iter()
                        .filter(|r| r.rho == rho && r.error.is_none())
                        .max_by(|a, b| a.length.total_cmp(&b.length))
                        .and_then(|r| {
                            r.column(name).map(|value| LimitProxy {
                                rho,
                                length: r.length,
                                value,
                            })
                        })
                })
                .collect();
            let trend = if proxies.len() < rhos.len() || proxies.len() < 2 {
                "insufficient".to_owned()
            } else {
                trend(&proxies.iter().map(|p| p.value).collect::<Vec<_>>()).to_owned()
            };
            ColumnSummary {
                column: name.to_owned(),
                proxies,
                trend,
            }
        })
        .collect();
    LimitSummary { columns, warnings }
}

fn trend(values: &[f64]) -> &'static str {
    if values.iter().any(|v| !v.is_finite()) {
        return "non-monotone";
    }
    let scale = values.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo <= 1e-12 * scale {
        "flat"
    } else if values.windows(2).all(|w| w[1] < w[0]) {
        "decreasing"
    } else if values.windows(2).all(|w| w[1] > w[0]) {
        "increasing"
    } else {
        "non-monotone"
    }
}
