use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hartree");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("HARTREE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change.
#[test]
fn help_matches_golden_files() {
    let cases: [(&str, &[&str]); 6] = [
        ("hartree", &["--help"]),
        ("make-state", &["make-state", "--help"]),
        ("simulate", &["simulate", "--help"]),
        ("verify", &["verify", "--help"]),
        ("bound-report", &["bound-report", "--help"]),
        ("scan", &["scan", "--help"]),
    ];
    for (name, args) in cases {
        let out = run(args);
        assert!(out.status.success());
        let text = stdout(&out);
        let path = golden_dir().join(format!("{name}.txt"));
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        let expected =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            text,
            expected,
            "help for {name} drifted from {}",
            path.display()
        );
    }
}

#[test]
fn make_state_examples() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("pw.json");
    let out = run(&[
        "make-state",
        "--family",
        "plane-wave",
        "--k0",
        "1,0,0",
        "--out",
        snap.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("S                    1.0000000000000000e0"));
    assert!(snap.exists());

    let out = run(&[
        "make-state",
        "--family",
        "two-mode",
        "--rho",
        "16",
        "--L",
        "8",
        "--escape",
        "0.375",
    ]);
    let text = stdout(&out);
    assert!(
        text.contains("weight at 0:0:0      9.41176470588235"),
        "{text}"
    );
    assert!(
        text.contains("weight at 22:0:0     5.88235294117647"),
        "{text}"
    );

    let out = run(&[
        "make-state",
        "--family",
        "perturbed",
        "--eps",
        "0.05",
        "--s",
        "6",
        "--seed",
        "1",
    ]);
    let line = stdout(&out)
        .lines()
        .find(|l| l.starts_with("condensate fraction"))
        .unwrap()
        .to_owned();
    let fraction: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(fraction >= 0.99, "{line}");
}

#[test]
fn exit_codes() {
    assert_eq!(
        run(&["make-state", "--family", "plane-wave", "--eps", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["make-state", "--family", "perturbed", "--s", "6"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["make-state", "--family", "plane-wave", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            "/nonexistent/run.json",
            "--out",
            "x.csv"
        ])
        .status
        .code(),
        Some(1)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"potential": {"family": "gaussian", "amplitude": -1.0, "sigma": 1.0}}"#,
    )
    .unwrap();
    let out = dir.path().join("t.csv");
    let args = [
        "simulate",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(run(&args).status.code(), Some(2));

    // Picard past its lifespan guard.
    let cfg = std::fs::read_to_string(configs().join("plane_wave.json")).unwrap();
    let picard = cfg
        .replace("\"t_final\": 0.01", "\"t_final\": 1.0")
        .replace("split_strang", "picard");
    let path = dir.path().join("picard.json");
    std::fs::write(&path, picard).unwrap();
    let args = [
        "simulate",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(
        run(&args).status.code(),
        Some(2),
        "beyond the lifespan guard is a config error"
    );
}

#[test]
fn simulate_plane_wave_phase() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let snap = dir.path().join("final.json");
    let cfg = configs().join("plane_wave.json");
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--snapshot-out",
        snap.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (state, header) = hartree::field::read_snapshot(&snap).unwrap();
    assert_eq!(header.family, "plane_wave");
    let b = hartree::PotentialModel::gaussian(1.0, 1.0).unwrap().b();
    let omega = 4.0 * std::f64::consts::PI.powi(2) / 16.0 + b;
    let a = state.coeff([1, 0, 0]);
    let expect = (-omega * 0.01_f64).sin_cos();
    assert!((a.re - expect.1).hypot(a.im - expect.0) < 1e-10);

    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        hartree::diagnostics::CSV_COLUMNS.join(",")
    );
    assert_eq!(lines.count(), 11);
}

#[test]
fn verify_suites() {
    let cfg = configs().join("plane_wave.json");
    let out = run(&[
        "verify",
        "--suite",
        "conservation",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS plane-wave phase error"));

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"dt\": 0.001", "\"dt\": 0.1")
        .replace("\"t_final\": 0.01", "\"t_final\": 0.2");
    let coarse = dir.path().join("coarse.json");
    // A strongly perturbed state under a coarse step drifts in energy beyond 1e-6.
    let text = text.replace(
        "{ \"family\": \"plane_wave\", \"k0\": [1, 0, 0], \"theta\": 0.0 }",
        "{ \"family\": \"perturbed_condensate\", \"eps\": 0.8, \"s\": 0.5, \"seed\": 3 }",
    );
    std::fs::write(&coarse, text).unwrap();
    let out = run(&[
        "verify",
        "--suite",
        "conservation",
        "--config",
        coarse.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
}

#[test]
fn bound_report_matches_library() {
    let path = configs().join("bounds.json");
    let out = run(&["bound-report", "--inputs", path.to_str().unwrap()]);
    assert!(out.status.success());
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let request: hartree::diagnostics::BoundRequest =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let report = request.evaluate().unwrap();
    assert_eq!(
        printed["excitation_bound"].as_f64().unwrap(),
        report.excitation_bound
    );
    assert_eq!(
        printed["quasi_vacuum_energy_bound"].as_f64().unwrap(),
        report.quasi_vacuum_energy_bound
    );
    assert_eq!(printed["omega"].as_f64().unwrap(), report.omega);
}

#[test]
fn scan_writes_table_and_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"potential": {"family": "gaussian", "amplitude": 1.0, "sigma": 1.0},
            "rhos": [5.0, 50.0], "lengths": [2.0, 3.0],
            "initial": {"family": "perturbed_condensate", "eps": 0.1, "s": 4.0, "seed": 0},
            "dt": 0.001, "t_final": 0.003, "master_seed": 9}"#,
    )
    .unwrap();
    let mut tables = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("scan{workers}.csv"));
        let traj = dir.path().join(format!("traj{workers}"));
        let status = Command::new(BIN)
            .args([
                "scan",
                "--plan",
                plan.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .args(["--trajectories", traj.to_str().unwrap()])
            .env("HARTREE_WORKERS", workers)
            .status()
            .unwrap();
        assert!(status.success());
        let rows = std::fs::read_to_string(&out).unwrap();
        // Drop the runtime column, the only nondeterministic one.
        let stable: Vec<String> = rows
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_owned())
            .collect();
        let files: Vec<Vec<u8>> = (0..4)
            .map(|i| std::fs::read(traj.join(format!("point_{i:03}.csv"))).unwrap())
            .collect();
        tables.push((stable, files));
    }
    assert_eq!(tables[0].0.len(), 5);
    assert_eq!(tables[0], tables[1]);
}
