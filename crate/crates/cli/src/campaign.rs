//! Scenario execution: every mode consumes the parsed config, writes its
//! artifacts under the output directory, and returns a report whose checks
//! carry their tolerances. Identical config + seed yields byte-identical
//! artifacts (all randomness is ChaCha-seeded and reductions are ordered).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use symred_core::dynamics::{casimirs, integrate, write_trajectory_csv, Hamiltonian, Method};
use symred_core::exec::ExecMode;
use symred_core::gauge::{CurvatureField, Domain, FieldExpr, GaugePotential};
use symred_core::lie_algebra::{DualElement, StructureConstants, AXIOM_TOLERANCE};
use symred_core::maxwell::{
    evolve, structure_rhs, write_diagnostics_csv, write_snapshot, EvolveOptions, FieldState,
    GridSpec, HamiltonianStructure, Spectral,
};
use symred_core::poisson::{
    canonicalization_residual, minimal_coupling, sample_phase_points, BracketSpec, PhasePoint,
};
use symred_core::reduction::{bivector_consistency, closedness_residual, contracted_bianchi};

use crate::config::{Mode, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// "<=" for residual bounds, ">=" for detection thresholds.
    pub comparison: String,
    pub pass: bool,
}

impl Check {
    fn upper(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            comparison: "<=".into(),
            pass: value <= tolerance,
        }
    }

    fn lower(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            comparison: ">=".into(),
            pass: value >= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub notes: Vec<String>,
}

impl RunReport {
    fn new(mode: Mode, seed: u64) -> Self {
        Self {
            mode: mode.as_str().into(),
            seed,
            pass: true,
            checks: Vec::new(),
            artifacts: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }
}

fn write_json(out: &Path, name: &str, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(out.join(name))?);
    serde_json::to_writer_pretty(&mut w, value).map_err(symred_core::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Execute the configured scenario, writing artifacts and `report.json`
/// under `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(out)?;
    let mut report = match cfg.mode {
        Mode::VerifyJacobi => verify_jacobi(cfg, out)?,
        Mode::VerifyBianchi => verify_bianchi(cfg)?,
        Mode::VerifyMinimalCoupling => verify_minimal_coupling(cfg)?,
        Mode::VerifyReduction => verify_reduction(cfg, out)?,
        Mode::SimulateParticle => simulate_particle(cfg, out)?,
        Mode::SimulateMaxwell => simulate_maxwell(cfg, out)?,
    };
    report.artifacts.push("report.json".into());
    write_json(out, "report.json", &report)?;
    log::info!(
        "{}: {} ({} checks)",
        report.mode,
        if report.pass { "pass" } else { "FAIL" },
        report.checks.len()
    );
    Ok(report)
}

/// Bracket spec for a scan algebra: abelian n = 1 uses the magnetic table,
/// anything else the extended one.
fn scan_spec(
    algebra: &StructureConstants,
    pot: GaugePotential,
) -> Result<(BracketSpec, usize), CliError> {
    let curv = CurvatureField::derived(pot.clone());
    if algebra.dim() == 1 && algebra.is_abelian() {
        Ok((BracketSpec::magnetic(curv)?, 0))
    } else {
        Ok((BracketSpec::extended_ym(curv, pot)?, algebra.dim()))
    }
}

fn verify_jacobi(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let algebra = cfg.algebra.build()?;
    let domain = Domain::default();

    let mut worst = 0.0f64;
    for i in 0..cfg.scan.potentials as u64 {
        let pot = cfg.potential.build(&algebra, cfg.seed + i)?;
        let (spec, internal) = scan_spec(&algebra, pot)?;
        let points =
            sample_phase_points(&domain, internal, cfg.scan.points, cfg.seed + 10_000 + i);
        let scan = spec.jacobi_scan(&points, ExecMode::default())?;
        worst = worst.max(scan.max_abs);
        if i == 0 {
            let table = spec.table_json(&points[0])?;
            write_json(out, "bracket_table.json", &table)?;
            report.artifacts.push("bracket_table.json".into());
        }
    }
    report.push(Check::upper(
        format!(
            "max jacobiator over {} potentials x {} points",
            cfg.scan.potentials, cfg.scan.points
        ),
        worst,
        cfg.tolerances.jacobi,
    ));

    if cfg.scan.injection {
        if algebra.dim() == 1 && algebra.is_abelian() {
            // Free-standing F_12 = q3 has unit field-equation residual; the
            // jacobiator must reproduce it at an origin-adjacent point.
            let spec =
                BracketSpec::magnetic(CurvatureField::abelian_f12(FieldExpr::linear(2, 1.0)))?;
            let x = PhasePoint::canonical([0.05, -0.03, 0.08], [0.4, -0.2, 0.7]);
            let j = spec.jacobiator(&x, (3, 4, 5))?;
            report.push(Check::upper(
                "injected field: |jacobiator| - 1",
                (j.abs() - 1.0).abs(),
                cfg.tolerances.jacobi,
            ));
        } else {
            let pot = cfg.potential.build(&algebra, cfg.seed)?;
            let curv = CurvatureField::derived(pot.clone()).perturbed(
                0,
                0,
                1,
                FieldExpr::linear(2, cfg.scan.delta),
            );
            let spec = BracketSpec::extended_ym(curv, pot)?;
            let points =
                sample_phase_points(&domain, algebra.dim(), cfg.scan.points, cfg.seed + 10_000);
            let mut detected = 0.0f64;
            for x in &points {
                detected = detected.max(spec.jacobiator(x, (3, 4, 5))?.abs());
            }
            report.push(Check::lower(
                format!("perturbed (delta = {:e}) momentum-triple jacobiator", cfg.scan.delta),
                detected,
                cfg.scan.delta / 10.0,
            ));
        }
    }
    Ok(report)
}

fn verify_bianchi(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let algebra = cfg.algebra.build()?;
    let domain = Domain::default();

    let mut worst = 0.0f64;
    for i in 0..cfg.scan.potentials as u64 {
        let pot = cfg.potential.build(&algebra, cfg.seed + i)?;
        let curv = CurvatureField::derived(pot.clone());
        let samples = domain.sample_points(cfg.scan.points, cfg.seed + 20_000 + i);
        for q in &samples {
            let r = curv.bianchi_residual(Some(&pot), q)?;
            for block in &r {
                for row in block {
                    for col in row {
                        for v in col {
                            worst = worst.max(v.abs());
                        }
                    }
                }
            }
        }
    }
    report.push(Check::upper(
        format!(
            "max residual of derived curvatures over {} potentials x {} points",
            cfg.scan.potentials, cfg.scan.points
        ),
        worst,
        cfg.tolerances.bianchi,
    ));

    if cfg.scan.injection {
        let curv = CurvatureField::abelian_f12(FieldExpr::linear(2, 1.0));
        let r = curv.bianchi_residual(None, &[0.1, -0.2, 0.3])?;
        report.push(Check::upper(
            "injected field: |R_123 - 1|",
            (r[0][0][1][2] - 1.0).abs(),
            cfg.tolerances.bianchi,
        ));
    }
    Ok(report)
}

fn verify_minimal_coupling(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let algebra = cfg.algebra.build()?;
    let domain = Domain::default();
    let n = algebra.dim();

    let mut worst = 0.0f64;
    for i in 0..cfg.scan.potentials as u64 {
        let pot = cfg.potential.build(&algebra, cfg.seed + i)?;
        let curv = CurvatureField::derived(pot.clone());
        let samples = sample_phase_points(&domain, n, cfg.scan.points, cfg.seed + 30_000 + i);
        let r = canonicalization_residual(&pot, &curv, &samples, ExecMode::default())?;
        worst = worst.max(r.max_deviation);
    }
    report.push(Check::upper(
        format!("canonicalization residual over {} seeds", cfg.scan.potentials),
        worst,
        cfg.tolerances.residual,
    ));

    if cfg.scan.injection {
        let pot = cfg.potential.build(&algebra, cfg.seed)?;
        let mut samples = sample_phase_points(&domain, n, cfg.scan.points, cfg.seed + 30_000);
        // Pin one sample where the perturbation is at full strength.
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        samples.push(
            PhasePoint::with_internal([0.0, 0.0, 1.0], [0.2, -0.1, 0.3], vec![0.0; n], y)
                .map_err(symred_core::Error::from)?,
        );
        for delta in [cfg.scan.delta, cfg.scan.delta / 10.0] {
            let curv = CurvatureField::derived(pot.clone()).perturbed(
                0,
                0,
                1,
                FieldExpr::linear(2, delta),
            );
            let r = canonicalization_residual(&pot, &curv, &samples, ExecMode::default())?;
            report.push(Check::lower(
                format!("perturbed residual at delta = {delta:e}"),
                r.max_deviation,
                delta / 2.0,
            ));
        }
    }
    Ok(report)
}

fn verify_reduction(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let algebra = cfg.algebra.build()?;
    let n = algebra.dim();
    let xi = if cfg.reduction.xi.is_empty() {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        DualElement::new(e)
    } else if cfg.reduction.xi.len() == n {
        DualElement::new(cfg.reduction.xi.clone())
    } else {
        return Err(CliError::Config(format!(
            "reduction.xi must have {n} components"
        )));
    };

    // Gate scan statistics over random dual elements.
    let accepted = DualElement::sample_batch(n, cfg.reduction.gate_scan, cfg.seed + 40_000)
        .iter()
        .filter(|e| algebra.check_invariance(e, AXIOM_TOLERANCE).is_ok())
        .count();
    if algebra.is_abelian() {
        report.push(Check::upper(
            format!("gate rejections out of {} (abelian)", cfg.reduction.gate_scan),
            (cfg.reduction.gate_scan - accepted) as f64,
            0.0,
        ));
    } else if algebra.is_so3() {
        report.push(Check::upper(
            format!("gate acceptances out of {} (so3)", cfg.reduction.gate_scan),
            accepted as f64,
            0.0,
        ));
    } else {
        report
            .notes
            .push(format!("gate scan: {accepted}/{} accepted", cfg.reduction.gate_scan));
    }

    let gate = algebra.check_invariance(&xi, AXIOM_TOLERANCE);
    let gate_pass = gate.is_ok();
    report.push(Check::upper(
        "configured dual element passes the gate",
        f64::from(!gate_pass as u8),
        0.0,
    ));

    let (mut closed, mut bianchi_gap, mut consistency) = (f64::NAN, f64::NAN, f64::NAN);
    if gate_pass {
        let pot = cfg.potential.build(&algebra, cfg.seed)?;
        let curv = CurvatureField::derived(pot.clone());
        let samples = Domain::default().sample_points(cfg.reduction.samples, cfg.seed + 41_000);
        closed = closedness_residual(&xi, &curv, &samples, ExecMode::default())?;
        let contracted =
            contracted_bianchi(&xi, &curv, Some(&pot), &samples, ExecMode::default())?;
        bianchi_gap = (closed - contracted).abs();
        consistency = bivector_consistency(&xi, &curv, &samples, ExecMode::default())?;
        report.push(Check::upper(
            "closedness residual of the derived form",
            closed,
            cfg.tolerances.closedness,
        ));
        report.push(Check::upper(
            "closedness vs contracted field-equation residual",
            bianchi_gap,
            cfg.tolerances.closedness,
        ));
        report.push(Check::upper(
            "inverse of the reduced form vs bracket table",
            consistency,
            cfg.tolerances.consistency,
        ));
    } else if let Err(e) = gate {
        report.notes.push(format!("gate failure: {e}"));
    }

    let verdict = json!({
        "gate": if gate_pass { "pass" } else { "fail" },
        "closedness_residual": closed,
        "bivector_deviation": consistency,
        "bianchi_agreement_gap": bianchi_gap,
        "samples": cfg.reduction.samples,
        "seed": cfg.seed,
    });
    write_json(out, "reduction_verdict.json", &verdict)?;
    report.artifacts.push("reduction_verdict.json".into());
    Ok(report)
}

fn simulate_particle(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let pc = &cfg.particle;
    let algebra = cfg.algebra.build()?;
    let pot = cfg.potential.build(&algebra, cfg.seed)?;
    let curv = CurvatureField::derived(pot.clone());

    let spec = match pc.bracket.as_str() {
        "canonical" => BracketSpec::Canonical,
        "magnetic" => BracketSpec::magnetic(curv)?,
        "reduced" => {
            if pc.xi.len() != algebra.dim() {
                return Err(CliError::Config(format!(
                    "particle.xi must have {} components for the reduced bracket",
                    algebra.dim()
                )));
            }
            BracketSpec::reduced_ym(curv, DualElement::new(pc.xi.clone()))?
        }
        "extended" => BracketSpec::extended_ym(curv, pot.clone())?,
        "canonicalized" => BracketSpec::canonicalized_ym(algebra.clone()),
        other => {
            return Err(CliError::Config(format!(
                "unknown particle.bracket \"{other}\""
            )))
        }
    };
    let h = match pc.hamiltonian.as_str() {
        "free" => Hamiltonian::Free,
        "coupled" => Hamiltonian::Coupled {
            potential: pot.clone(),
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown particle.hamiltonian \"{other}\""
            )))
        }
    };
    let method = match pc.method.as_str() {
        "rk4" => Method::Rk4,
        "boris" => Method::Boris,
        other => return Err(CliError::Config(format!("unknown particle.method \"{other}\""))),
    };
    let x0 = if pc.u0.is_empty() && pc.y0.is_empty() {
        PhasePoint::canonical(pc.q0, pc.p0)
    } else {
        PhasePoint::with_internal(pc.q0, pc.p0, pc.u0.clone(), pc.y0.clone())
            .map_err(symred_core::Error::from)?
    };

    let traj = integrate(&spec, &h, &x0, pc.t_end, pc.dt, method)?;
    let mut csv = BufWriter::new(File::create(out.join("trajectory.csv"))?);
    write_trajectory_csv(&mut csv, &traj)?;
    csv.flush()?;
    report.artifacts.push("trajectory.csv".into());

    report.push(Check::upper(
        "energy drift",
        traj.energy_drift(),
        cfg.tolerances.energy_drift,
    ));
    for (label, _) in casimirs(&spec, &x0) {
        report.push(Check::upper(
            format!("{label} drift"),
            traj.casimir_drift(&label).unwrap_or(0.0),
            cfg.tolerances.energy_drift,
        ));
    }
    Ok(report)
}

fn simulate_maxwell(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(cfg.mode, cfg.seed);
    let mc = &cfg.maxwell;
    let grid = GridSpec::new(mc.n, mc.l)?;
    let spectral = Spectral::new(grid);
    let initial = match mc.initial.as_str() {
        "plane-wave" => FieldState::plane_wave(grid),
        "random-solenoidal" => FieldState::random_solenoidal(&spectral, cfg.seed, mc.max_wavenumber),
        other => {
            return Err(CliError::Config(format!(
                "unknown maxwell.initial \"{other}\" (expected plane-wave, random-solenoidal)"
            )))
        }
    };
    let structure = match mc.structure.as_str() {
        "canonical" => HamiltonianStructure::Canonical,
        "helicity" => HamiltonianStructure::Helicity,
        other => {
            return Err(CliError::Config(format!(
                "unknown maxwell.structure \"{other}\" (expected canonical, helicity)"
            )))
        }
    };

    // Both assembly routes must agree before the run starts.
    let (e_can, b_can) = structure_rhs(&spectral, &initial, HamiltonianStructure::Canonical)?;
    let (e_hel, b_hel) = structure_rhs(&spectral, &initial, HamiltonianStructure::Helicity)?;
    let rhs_gap = e_can.linf_diff(&e_hel).max(b_can.linf_diff(&b_hel));
    report.push(Check::upper(
        "canonical vs helicity right-hand side",
        rhs_gap,
        cfg.tolerances.rhs_agreement,
    ));

    let opts = EvolveOptions {
        t_end: mc.t_end,
        dt: mc.dt,
        structure,
        snapshot_stride: (mc.snapshot_stride > 0).then_some(mc.snapshot_stride),
    };
    let result = evolve(&spectral, &initial, &opts)?;

    let mut csv = BufWriter::new(File::create(out.join("diagnostics.csv"))?);
    write_diagnostics_csv(&mut csv, &result.diagnostics)?;
    csv.flush()?;
    report.artifacts.push("diagnostics.csv".into());
    write_snapshot(out, "state_final", &result.final_state)?;
    report.artifacts.push("state_final.bin".into());
    report.artifacts.push("state_final.json".into());
    for (idx, (_, state)) in result.snapshots.iter().enumerate() {
        let stem = format!("state_{idx:04}");
        write_snapshot(out, &stem, state)?;
        report.artifacts.push(format!("{stem}.bin"));
        report.artifacts.push(format!("{stem}.json"));
    }

    let first = result.diagnostics.first().expect("initial row");
    let (mut de, mut dh, mut div_e, mut div_b) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for row in &result.diagnostics {
        de = de.max((row.energy - first.energy).abs());
        dh = dh.max((row.helicity - first.helicity).abs());
        div_e = div_e.max(row.div_e);
        div_b = div_b.max(row.div_b);
    }
    report.push(Check::upper("energy drift", de, cfg.tolerances.energy_drift));
    report.push(Check::upper(
        "helicity drift",
        dh,
        cfg.tolerances.energy_drift,
    ));
    report.push(Check::upper("max div E", div_e, 1e-8));
    report.push(Check::upper("max div B", div_b, 1e-8));
    if let Some(w) = result.constraint_warning {
        report.notes.push(w);
    }
    Ok(report)
}

/// Quick smoke entry used by tests: run a config from a TOML string.
pub fn run_from_str(text: &str, out: &Path) -> Result<RunReport, CliError> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("inline config: {e}")))?;
    run(&cfg, out)
}

/// Minimal-coupling sanity helper shared by the particle scenarios: maps a
/// trajectory state through the momentum shift (used in tests).
pub fn map_through_coupling(
    x: &PhasePoint,
    pot: &GaugePotential,
) -> Result<PhasePoint, CliError> {
    Ok(minimal_coupling(x, pot)?)
}
