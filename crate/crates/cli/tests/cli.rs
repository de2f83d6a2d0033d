//! End-to-end CLI coverage: library-level campaigns plus binary exit codes.

use std::path::Path;
use std::process::Command;

use symred_cli::campaign::{run_from_str, RunReport};
use symred_cli::report::render;

fn run_in(dir: &Path, toml: &str) -> RunReport {
    run_from_str(toml, dir).expect("campaign runs")
}

#[test]
fn verify_jacobi_abelian_passes_and_dumps_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "verify-jacobi"
seed = 42
[algebra]
preset = "abelian"
dim = 1
[scan]
potentials = 4
points = 20
injection = true
delta = 1e-2
"#,
    );
    assert!(report.pass, "checks: {:?}", report.checks);
    assert!(dir.path().join("bracket_table.json").exists());
    assert!(dir.path().join("report.json").exists());

    let table: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("bracket_table.json")).unwrap())
            .unwrap();
    assert_eq!(table["kind"], "magnetic");
    assert!(table["entries"].as_array().unwrap().len() >= 3);

    let rendered = render(&[dir.path().join("report.json")]).unwrap();
    assert!(rendered.contains("PASS"));
    assert!(rendered.contains("max jacobiator"));
}

#[test]
fn verify_jacobi_so3_reports_structural_failure_honestly() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "verify-jacobi"
seed = 42
[algebra]
preset = "so3"
[scan]
potentials = 2
points = 10
injection = true
delta = 1e-2
[tolerances]
jacobi = 1e-5
"#,
    );
    // The internal-sector triples make the clean scan fail with value 1,
    // while the momentum-sector perturbation check passes.
    assert!(!report.pass);
    let clean = &report.checks[0];
    assert!(!clean.pass);
    assert!((clean.value - 1.0).abs() < 1e-6);
    let detection = report.checks.iter().find(|c| c.comparison == ">=").unwrap();
    assert!(detection.pass);
}

#[test]
fn verify_minimal_coupling_so3_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "verify-minimal-coupling"
seed = 11
[algebra]
preset = "so3"
[scan]
potentials = 3
points = 10
injection = true
delta = 1e-2
"#,
    );
    assert!(report.pass, "checks: {:?}", report.checks);
}

#[test]
fn verify_reduction_gate_failure_exits_one_with_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "verify-reduction"
seed = 5
[algebra]
preset = "so3"
[reduction]
xi = [0.0, 0.0, 1.0]
samples = 10
gate_scan = 20
"#,
    );
    assert!(!report.pass);
    let verdict: serde_json::Value = serde_json::from_reader(
        std::fs::File::open(dir.path().join("reduction_verdict.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(verdict["gate"], "fail");
    assert!(report.notes.iter().any(|n| n.contains("invariance")));
}

#[test]
fn simulate_particle_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "simulate-particle"
seed = 1
[algebra]
preset = "abelian"
dim = 1
[potential]
preset = "uniform-b"
b = 1.0
[particle]
bracket = "magnetic"
hamiltonian = "free"
method = "boris"
t_end = 1.0
dt = 1e-3
q0 = [0.0, 0.0, 0.0]
p0 = [1.0, 0.0, 0.0]
[tolerances]
energy_drift = 1e-10
"#,
    );
    assert!(report.pass, "checks: {:?}", report.checks);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,q1,q2,q3,p1,p2,p3,H"));
    assert_eq!(csv.lines().count(), 1002);
}

#[test]
fn simulate_maxwell_small_grid_with_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_in(
        dir.path(),
        r#"
mode = "simulate-maxwell"
seed = 3
[maxwell]
n = 8
l = 6.283185307179586
structure = "canonical"
initial = "random-solenoidal"
max_wavenumber = 2
t_end = 0.1
dt = 1e-2
snapshot_stride = 5
[tolerances]
energy_drift = 1e-9
rhs_agreement = 1e-12
"#,
    );
    assert!(report.pass, "checks: {:?}", report.checks);
    assert!(dir.path().join("diagnostics.csv").exists());
    assert!(dir.path().join("state_final.bin").exists());
    assert!(dir.path().join("state_0000.bin").exists());
    // Snapshot roundtrip through the documented binary format.
    let state = symred_core::maxwell::read_snapshot(dir.path(), "state_final").unwrap();
    assert_eq!(state.grid().n(), 8);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_symred");
    let dir = tempfile::tempdir().unwrap();

    // Empty config: usage error, exit 2.
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, "").unwrap();
    let out = Command::new(bin)
        .args(["verify", "jacobi", "--config"])
        .arg(&empty)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown preset: exit 2, message names the offending key.
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "mode = \"verify-jacobi\"\nseed = 1\n[potential]\npreset = \"vortex\"\n[scan]\npotentials = 1\npoints = 2\ninjection = false\ndelta = 1e-2\n",
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["verify", "jacobi", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("bad_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vortex"));

    // Mode/subcommand mismatch: exit 2.
    let mismatched = dir.path().join("mismatch.toml");
    std::fs::write(&mismatched, "mode = \"verify-bianchi\"\nseed = 1\n").unwrap();
    let out = Command::new(bin)
        .args(["verify", "jacobi", "--config"])
        .arg(&mismatched)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Quick passing run: exit 0, then report renders it.
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        "mode = \"verify-bianchi\"\nseed = 9\n[scan]\npotentials = 2\npoints = 5\ninjection = true\ndelta = 1e-2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("good_out");
    let out = Command::new(bin)
        .args(["verify", "bianchi", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = Command::new(bin)
        .arg("report")
        .arg(out_dir.join("report.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify-bianchi"));

    // Gate failure scenario: exit 1.
    let gate = dir.path().join("gate.toml");
    std::fs::write(
        &gate,
        "mode = \"verify-reduction\"\nseed = 5\n[algebra]\npreset = \"so3\"\n[reduction]\nxi = [0.0, 0.0, 1.0]\nsamples = 5\ngate_scan = 10\n",
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["verify", "reduction", "--config"])
        .arg(&gate)
        .arg("--out")
        .arg(dir.path().join("gate_out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Missing report artifact: exit 2.
    let out = Command::new(bin)
        .arg("report")
        .arg(dir.path().join("nope.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            symred_cli::config::load(&path)
                .unwrap_or_else(|e| panic!("{} failed to parse: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 8);
}
