use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hartree::diagnostics::{assumption_check, BoundRequest, CsvSink};
use hartree::field::{
    format_mode, make_state, parse_mode, write_snapshot, Mode, StateSpec, TorusLattice,
};
use hartree::run::RunConfig;
use hartree::scan::{
    default_workers, iterated_limit_summary, run_scan, write_table, ScanPlan, MONITORED,
    WORKERS_ENV,
};
use hartree::verify::{default_config, run_suite, Suite};
use hartree::SpectralState;

/// Spectral toolkit for the Hartree equation on a periodic box.
#[derive(Debug, Parser)]
#[command(name = "hartree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an initial state and write it as a snapshot.
    MakeState(MakeState),
    /// Evolve a configured state and write its trajectory CSV.
    Simulate(Simulate),
    /// Run a named invariant suite; exits with 3 when a check fails.
    Verify(Verify),
    /// Evaluate the Gronwall rate and the excitation and quasi-vacuum bounds.
    BoundReport(BoundReport),
    /// Run a (rho, L) parameter scan.
    Scan(Scan),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    PlaneWave,
    TwoMode,
    Perturbed,
}

#[derive(Debug, Args)]
struct MakeState {
    #[arg(long, value_enum)]
    family: Family,
    /// Condensate mode, as `a,b,c` or `a:b:c`.
    #[arg(long, default_value = "0,0,0", value_parser = parse_mode_arg)]
    k0: Mode,
    /// Condensate phase (plane-wave, perturbed).
    #[arg(long)]
    theta: Option<f64>,
    /// Density.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Box side length.
    #[arg(long = "L", default_value_t = 4.0)]
    length: f64,
    /// Lattice cutoff; defaults to the smallest one holding every populated mode, at least ceil(L).
    #[arg(long = "M")]
    cutoff: Option<usize>,
    /// Escape exponent a of the mode (floor(rho^a L), 0, 0) (two-mode).
    #[arg(long)]
    escape: Option<f64>,
    /// Perturbation amplitude (perturbed).
    #[arg(long)]
    eps: Option<f64>,
    /// Decay exponent of the perturbation (perturbed).
    #[arg(long)]
    s: Option<f64>,
    /// Random seed of the perturbation phases (perturbed).
    #[arg(long)]
    seed: Option<u64>,
    /// Exponent g of the extra rho^-g factor on the perturbation (perturbed).
    #[arg(long)]
    eps_density_exponent: Option<f64>,
    /// Constant c of the kinetic-tail check, summing over |m| > cL.
    #[arg(long, default_value_t = 1.0)]
    tail_c: f64,
    /// Snapshot path; the summary is printed either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Simulate {
    /// Run config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Trajectory CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the final state as a snapshot.
    #[arg(long)]
    snapshot_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Conservation,
    Oracle,
    Envelopes,
    Symmetry,
    Algebra,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Conservation => Suite::Conservation,
            SuiteArg::Oracle => Suite::Oracle,
            SuiteArg::Envelopes => Suite::Envelopes,
            SuiteArg::Symmetry => Suite::Symmetry,
            SuiteArg::Algebra => Suite::Algebra,
        }
    }
}

#[derive(Debug, Args)]
struct Verify {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Run config to verify against; a built-in perturbed condensate otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BoundReport {
    /// Bound inputs (JSON).
    #[arg(long)]
    inputs: PathBuf,
}

#[derive(Debug, Args)]
struct Scan {
    /// Scan plan (JSON).
    #[arg(long)]
    plan: PathBuf,
    /// Scan table CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, env = WORKERS_ENV, hide_env_values = true)]
    workers: Option<usize>,
    /// Directory for per-point trajectory CSVs, overriding the plan.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    /// Write the iterated-limit summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

fn parse_mode_arg(s: &str) -> Result<Mode, String> {
    parse_mode(s).map_err(|e| e.to_string())
}

/// A suite ran and at least one check failed.
#[derive(Debug)]
struct VerificationFailed(Suite);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "suite {} failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::MakeState(args) => make_state_cmd(args),
        Command::Simulate(args) => simulate(args),
        Command::Verify(args) => verify(args),
        Command::BoundReport(args) => bound_report(args),
        Command::Scan(args) => scan(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let part = cause.to_string();
        if !text.contains(&part) {
            text = format!("{text}: {part}");
        }
    }
    text
}

/// 2 for bad input, 3 for failed verification, 1 for IO and runtime failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 3;
    }
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<hartree::Error>() {
            return match err {
                hartree::Error::Io { .. } => 1,
                other if other.is_config() => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<InvalidArgs>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    1
}

/// Flags inconsistent with the chosen family.
#[derive(Debug)]
struct InvalidArgs(String);

impl std::fmt::Display for InvalidArgs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidArgs {}

fn reject(family: &str, flags: &[(&str, bool)]) -> Result<()> {
    let stray: Vec<&str> = flags
        .iter()
        .filter(|(_, set)| *set)
        .map(|(name, _)| *name)
        .collect();
    if !stray.is_empty() {
        return Err(
            InvalidArgs(format!("{} not used by family {family}", stray.join(", "))).into(),
        );
    }
    Ok(())
}

fn require<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| InvalidArgs(format!("family {family} needs {flag}")).into())
}

fn spec_from_args(a: &MakeState) -> Result<StateSpec> {
    Ok(match a.family {
        Family::PlaneWave => {
            reject(
                "plane-wave",
                &[
                    ("--escape", a.escape.is_some()),
                    ("--eps", a.eps.is_some()),
                    ("--s", a.s.is_some()),
                    ("--seed", a.seed.is_some()),
                    ("--eps-density-exponent", a.eps_density_exponent.is_some()),
                ],
            )?;
            StateSpec::PlaneWave {
                k0: a.k0,
                theta: a.theta.unwrap_or(0.0),
            }
        }
        Family::TwoMode => {
            reject(
                "two-mode",
                &[
                    ("--theta", a.theta.is_some()),
                    ("--eps", a.eps.is_some()),
                    ("--s", a.s.is_some()),
                    ("--seed", a.seed.is_some()),
                    ("--eps-density-exponent", a.eps_density_exponent.is_some()),
                ],
            )?;
            StateSpec::TwoMode {
                k0: a.k0,
                escape: require(a.escape, "--escape", "two-mode")?,
            }
        }
        Family::Perturbed => {
            reject("perturbed", &[("--escape", a.escape.is_some())])?;
            StateSpec::PerturbedCondensate {
                k0: a.k0,
                theta: a.theta.unwrap_or(0.0),
                eps: require(a.eps, "--eps", "perturbed")?,
                s: require(a.s, "--s", "perturbed")?,
                seed: a.seed.unwrap_or(0),
                eps_density_exponent: a.eps_density_exponent.unwrap_or(0.0),
            }
        }
    })
}

fn auto_cutoff(spec: &StateSpec, rho: f64, length: f64) -> usize {
    let extent = |m: Mode| {
        m.iter()
            .map(|c| c.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    };
    let mut cutoff = (length.ceil() as usize).max(1);
    match spec {
        StateSpec::PlaneWave { k0, .. } | StateSpec::PerturbedCondensate { k0, .. } => {
            cutoff = cutoff.max(extent(*k0))
        }
        StateSpec::TwoMode { k0, escape } => {
            cutoff = cutoff
                .max(extent(*k0))
                .max(extent(hartree::field::escaping_mode(rho, length, *escape)));
        }
    }
    cutoff
}

fn make_state_cmd(a: MakeState) -> Result<()> {
    let spec = spec_from_args(&a)?;
    let cutoff = a
        .cutoff
        .unwrap_or_else(|| auto_cutoff(&spec, a.rho, a.length));
    let lattice = TorusLattice::new(a.length, cutoff)?;
    let state = make_state(&spec, lattice, a.rho)?;
    print_state_summary(&state, &spec, a.tail_c)?;
    if let Some(path) = &a.out {
        write_snapshot(path, &state, spec.family_name(), spec.seed())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_state_summary(state: &SpectralState, spec: &StateSpec, tail_c: f64) -> Result<()> {
    let lat = state.lattice();
    let (k_star, a_star) = state.dominant_mode();
    println!("family               {}", spec.family_name());
    println!(
        "L, M, rho            {}, {}, {}",
        lat.length(),
        lat.cutoff(),
        state.rho()
    );
    println!("mass                 {:.16e}", state.mass());
    println!("S                    {:.16e}", state.s_sum());
    println!("T                    {:.16e}", state.t_sum());
    println!(
        "condensate fraction  {:.16e} at {}",
        a_star.norm_sqr(),
        format_mode(k_star)
    );
    if let StateSpec::TwoMode { k0, escape } = spec {
        let far = hartree::field::escaping_mode(state.rho(), lat.length(), *escape);
        println!(
            "weight at {:<10} {:.16e}",
            format_mode(*k0),
            state.coeff(*k0).norm_sqr()
        );
        println!(
            "weight at {:<10} {:.16e}",
            format_mode(far),
            state.coeff(far).norm_sqr()
        );
    }
    let m = lat.cutoff() as f64;
    let report = assumption_check(state, &[m / 4.0, m / 2.0, 3.0 * m / 4.0], tail_c)?;
    let tails: Vec<String> = report
        .tails
        .iter()
        .map(|(r, t)| format!("{r}: {t:.3e}"))
        .collect();
    println!("l1 tails beyond      {}", tails.join(", "));
    println!("tails non-increasing {}", report.tails_non_increasing);
    println!(
        "{:<20} {:.3e}",
        format!("kinetic tail (c={})", report.c),
        report.kinetic_tail
    );
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn simulate(a: Simulate) -> Result<()> {
    let config = RunConfig::from_path(&a.config)?;
    let prepared = config.prepare()?;
    let mut sink = CsvSink::new(create(&a.out)?)?;
    let mut count = 0usize;
    let last = prepared.system.evolve_with(
        &prepared.initial,
        config.t_final,
        &config.integrator,
        config.stride,
        |s| {
            count += 1;
            sink.write(&prepared.context.record(s))
        },
    )?;
    sink.finish()?
        .flush()
        .with_context(|| format!("cannot write {}", a.out.display()))?;

    let (k0, theta) = prepared.reference;
    let elapsed = last.t() - prepared.initial.t();
    let alpha = last.coeff(k0);
    let phase = theta - prepared.context.reference_frequency() * elapsed;
    let (re, im) = (phase.cos(), phase.sin());
    println!("records              {count}");
    println!("t                    {:.16e}", last.t());
    println!("mass                 {:.16e}", last.mass());
    println!(
        "alpha({})        {:.16e} {:+.16e}i",
        format_mode(k0),
        alpha.re,
        alpha.im
    );
    println!("plane-wave reference {re:.16e} {im:+.16e}i");
    println!(
        "distance             {:.3e}",
        (alpha.re - re).hypot(alpha.im - im)
    );
    println!("wrote {}", a.out.display());
    if let Some(path) = &a.snapshot_out {
        write_snapshot(path, &last, &prepared.family, prepared.seed)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verify(a: Verify) -> Result<()> {
    let config = match &a.config {
        Some(path) => RunConfig::from_path(path)?,
        None => default_config(),
    };
    let suite = Suite::from(a.suite);
    let report = run_suite(suite, &config)?;
    if a.json {
        print_json(&report)?;
    } else {
        println!("suite {suite}");
        for check in &report.checks {
            println!("  {check}");
        }
    }
    if !report.pass() {
        return Err(VerificationFailed(suite).into());
    }
    Ok(())
}

fn bound_report(a: BoundReport) -> Result<()> {
    let text = std::fs::read_to_string(&a.inputs)
        .with_context(|| format!("cannot read {}", a.inputs.display()))?;
    let request: BoundRequest = serde_json::from_str(&text).map_err(hartree::Error::from)?;
    print_json(&request.evaluate()?)
}

fn scan(a: Scan) -> Result<()> {
    let mut plan = ScanPlan::from_path(&a.plan)?;
    if let Some(dir) = a.trajectories {
        plan.trajectories = Some(dir);
    }
    let workers = a.workers.unwrap_or_else(default_workers);
    if workers == 0 {
        bail!(InvalidArgs("--workers must be at least 1".into()));
    }
    let rows = run_scan(&plan, workers)?;
    write_table(create(&a.out)?, &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("points               {} ({failed} failed)", rows.len());
    let summary = iterated_limit_summary(&rows, &MONITORED);
    for column in &summary.columns {
        let values: Vec<String> = column
            .proxies
            .iter()
            .map(|p| format!("rho {}: {:.3e}", p.rho, p.value))
            .collect();
        println!(
            "{:<20} {:<13} {}",
            column.column,
            column.trend,
            values.join(", ")
        );
    }
    for warning in &summary.warnings {
        println!("warning: {warning}");
    }
    println!("wrote {}", a.out.display());
    if let Some(path) = &a.summary {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &summary).map_err(hartree::Error::from)?;
        w.flush()?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(hartree::Error::from)?
    );
    Ok(())
}
