//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured value, its tolerance, and the elapsed time.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use symred_core::dynamics::{integrate, Hamiltonian, Method};
use symred_core::exec::ExecMode;
use symred_core::gauge::{
    CurvatureField, Domain, FieldExpr, GaugePotential, RandomTrigOptions,
};
use symred_core::lie_algebra::{DualElement, StructureConstants, AXIOM_TOLERANCE};
use symred_core::maxwell::{
    evolve, structure_rhs, EvolveOptions, FieldState, GridSpec, HamiltonianStructure, Spectral,
};
use symred_core::poisson::{
    canonicalization_residual, coord_names, sample_phase_points, BracketSpec, PhasePoint,
    JACOBIATOR_BIANCHI_SIGN,
};
use symred_core::reduction::{
    bivector_consistency, closedness_residual, contracted_bianchi, reduced_form,
};

struct Criterion {
    number: u32,
    label: &'static str,
    budget_s: f64,
    started: Instant,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(number: u32, label: &'static str, budget_s: f64) -> Self {
        Self {
            number,
            label,
            budget_s,
            started: Instant::now(),
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, value: f64, tolerance: f64) {
        let line = format!("{name} = {value:.3e} (tolerance {tolerance:.1e})");
        if value <= tolerance {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    fn check_at_least(&mut self, name: &str, value: f64, threshold: f64) {
        let line = format!("{name} = {value:.3e} (required >= {threshold:.1e})");
        if value >= threshold {
            self.notes.push(line);
        } else {
            self.failures.push(line);
        }
    }

    fn finish(mut self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if elapsed > self.budget_s {
            self.failures
                .push(format!("runtime {elapsed:.1}s exceeds {}s", self.budget_s));
        }
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "acceptance criterion {} ({}): {verdict} [{elapsed:.2}s] {}",
            self.number,
            self.label,
            self.notes.join("; "),
        );
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {}",
            self.number,
            self.failures.join("; ")
        );
    }
}

fn trig(seed: u64, algebra: StructureConstants) -> GaugePotential {
    GaugePotential::random_trig(algebra, seed, RandomTrigOptions::default())
}

#[test]
fn criterion_01_jacobi_maxwell() {
    let mut cr = Criterion::new(1, "Jacobi <=> field equations, abelian", 10.0);

    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let spec = BracketSpec::magnetic(CurvatureField::derived(trig(
            100 + seed,
            StructureConstants::abelian(1),
        )))
        .unwrap();
        let points = sample_phase_points(&Domain::default(), 0, 50, 500 + seed);
        let scan = spec.jacobi_scan(&points, ExecMode::default()).unwrap();
        worst = worst.max(scan.max_abs);
    }
    cr.check("max jacobiator over 20 potentials x 50 points", worst, 1e-6);

    // Injected non-closed curvature F_12 = q3: Bianchi residual is exactly 1.
    let spec =
        BracketSpec::magnetic(CurvatureField::abelian_f12(FieldExpr::linear(2, 1.0))).unwrap();
    let x = PhasePoint::canonical([0.05, -0.03, 0.08], [0.4, -0.2, 0.7]);
    let j = spec.jacobiator(&x, (3, 4, 5)).unwrap();
    cr.check(
        "insertion: |jacobiator - sign * bianchi|",
        (j - JACOBIATOR_BIANCHI_SIGN * 1.0).abs(),
        1e-6,
    );
    cr.finish();
}

#[test]
fn criterion_02_jacobi_yang_mills() {
    let mut cr = Criterion::new(2, "Jacobi <=> field equations, so(3)", 30.0);

    let mut worst = 0.0f64;
    let mut worst_triple = (0, 1, 2);
    for seed in 0..20u64 {
        let pot = trig(200 + seed, StructureConstants::so3());
        let spec =
            BracketSpec::extended_ym(CurvatureField::derived(pot.clone()), pot).unwrap();
        let points = sample_phase_points(&Domain::default(), 3, 50, 700 + seed);
        let scan = spec.jacobi_scan(&points, ExecMode::default()).unwrap();
        if scan.max_abs > worst {
            worst = scan.max_abs;
            worst_triple = scan.worst_triple;
        }
    }
    let names = coord_names(3);
    cr.check(
        &format!(
            "max jacobiator over all coordinate triples (worst at {},{},{})",
            names[worst_triple.0], names[worst_triple.1], names[worst_triple.2]
        ),
        worst,
        1e-5,
    );

    // Perturbation detection on the momentum triple.
    let pot = trig(200, StructureConstants::so3());
    let curv = CurvatureField::derived(pot.clone()).perturbed(0, 0, 1, FieldExpr::linear(2, 1e-2));
    let spec = BracketSpec::extended_ym(curv, pot).unwrap();
    let points = sample_phase_points(&Domain::default(), 3, 50, 700);
    let mut detected = 0.0f64;
    for x in &points {
        detected = detected.max(spec.jacobiator(x, (3, 4, 5)).unwrap().abs());
    }
    cr.check_at_least("perturbed (delta = 1e-2) momentum-triple jacobiator", detected, 1e-3);
    cr.finish();
}

#[test]
fn criterion_03_minimal_coupling() {
    let mut cr = Criterion::new(3, "minimal coupling canonicalization", 20.0);

    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        for algebra in [StructureConstants::abelian(1), StructureConstants::so3()] {
            let n = algebra.dim();
            let pot = trig(300 + seed, algebra);
            let curv = CurvatureField::derived(pot.clone());
            let samples = sample_phase_points(&Domain::default(), n, 20, 900 + seed);
            let report =
                canonicalization_residual(&pot, &curv, &samples, ExecMode::default()).unwrap();
            worst = worst.max(report.max_deviation);
        }
    }
    cr.check("residual over 10 seeds x {abelian, so(3)}", worst, 1e-6);

    // Perturbation protocol at delta = 1e-2 and 1e-3, on a sample set that
    // pins one point with y1 = 1 and q3 = 1 so the bound is deterministic.
    let pot = trig(333, StructureConstants::abelian(1));
    let mut samples = sample_phase_points(&Domain::default(), 1, 50, 911);
    samples.push(
        PhasePoint::with_internal([0.0, 0.0, 1.0], [0.2, -0.1, 0.3], vec![0.0], vec![1.0])
            .unwrap(),
    );
    let mut previous = f64::INFINITY;
    for delta in [1e-2, 1e-3] {
        let curv = CurvatureField::derived(pot.clone()).perturbed(
            0,
            0,
            1,
            FieldExpr::linear(2, delta),
        );
        let report =
            canonicalization_residual(&pot, &curv, &samples, ExecMode::default()).unwrap();
        cr.check_at_least(
            &format!("perturbed residual at delta = {delta:.0e}"),
            report.max_deviation,
            delta / 2.0,
        );
        // Proportional decay with the amplitude.
        cr.check(
            &format!("perturbed residual bounded at delta = {delta:.0e}"),
            report.max_deviation,
            previous,
        );
        previous = report.max_deviation / 2.0;
    }
    cr.finish();
}

#[test]
fn criterion_04_invariance_gate() {
    let mut cr = Criterion::new(4, "coadjoint invariance gate", 1.0);
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(4444);

    let abelian = StructureConstants::abelian(3);
    let mut abelian_accepted = 0usize;
    let so3 = StructureConstants::so3();
    let mut so3_rejected = 0usize;
    for _ in 0..100 {
        let xi = DualElement::new((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect());
        if abelian.check_invariance(&xi, AXIOM_TOLERANCE).is_ok() {
            abelian_accepted += 1;
        }
        if so3.check_invariance(&xi, AXIOM_TOLERANCE).is_err() {
            so3_rejected += 1;
        }
    }
    cr.check("abelian rejections out of 100", (100 - abelian_accepted) as f64, 0.0);
    cr.check("so(3) acceptances out of 100 random", (100 - so3_rejected) as f64, 0.0);
    let zero_ok = so3.check_invariance(&DualElement::zeros(3), AXIOM_TOLERANCE).is_ok();
    cr.check("so(3) rejection of the zero element", f64::from(!zero_ok as u8), 0.0);
    cr.finish();
}

#[test]
fn criterion_05_larmor_orbit() {
    let mut cr = Criterion::new(5, "Larmor orbit", 5.0);
    let spec =
        BracketSpec::magnetic(CurvatureField::derived(GaugePotential::uniform_b(1.0))).unwrap();
    let x0 = PhasePoint::canonical([0.0; 3], [1.0, 0.0, 0.0]);
    let dt = 1e-3;
    let traj = integrate(&spec, &Hamiltonian::Free, &x0, 6.4, dt, Method::Rk4).unwrap();

    // Analytic solution: q(t) = (sin t, cos t - 1, 0), circle of radius 1
    // centered at (0, -1, 0); momentum rotates clockwise with period 2 pi.
    let mut radius_err = 0.0f64;
    for x in &traj.states {
        let r = (x.q[0] * x.q[0] + (x.q[1] + 1.0) * (x.q[1] + 1.0)).sqrt();
        radius_err = radius_err.max((r - 1.0).abs());
    }
    cr.check("radius error", radius_err, 1e-6);

    // The unwrapped momentum angle is linear in t, so the period is read off
    // by interpolating the -2 pi crossing.
    let mut phase = 0.0f64;
    let mut prev = 0.0f64;
    let mut period = None;
    for (k, x) in traj.states.iter().enumerate() {
        let raw = x.p[1].atan2(x.p[0]);
        if k > 0 {
            let mut d = raw - prev;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            let new_phase = phase + d;
            let target = -2.0 * std::f64::consts::PI;
            if phase > target && new_phase <= target {
                let frac = (phase - target) / (phase - new_phase);
                period = Some(traj.times[k - 1] + frac * dt);
                break;
            }
            phase = new_phase;
        }
        prev = raw;
    }
    let period = period.expect("orbit completes a revolution within 6.4");
    cr.check(
        "period error",
        (period - 2.0 * std::f64::consts::PI).abs(),
        1e-6,
    );
    cr.finish();
}

#[test]
fn criterion_06_maxwell_plane_wave() {
    let mut cr = Criterion::new(6, "vacuum plane wave over one period", 60.0);
    let grid = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(grid);
    let initial = FieldState::plane_wave(grid);
    let opts = EvolveOptions {
        t_end: 2.0 * std::f64::consts::PI,
        dt: 1e-3,
        structure: HamiltonianStructure::Helicity,
        snapshot_stride: None,
    };
    let result = evolve(&spectral, &initial, &opts).unwrap();

    cr.check(
        "final state L-infinity error",
        result.final_state.linf_diff(&initial),
        1e-6,
    );
    let div_b = result
        .diagnostics
        .iter()
        .map(|d| d.div_b)
        .fold(0.0f64, f64::max);
    cr.check("div B throughout", div_b, 1e-12);
    let e0 = result.diagnostics[0].energy;
    let h0 = result.diagnostics[0].helicity;
    let denergy = result
        .diagnostics
        .iter()
        .map(|d| (d.energy - e0).abs())
        .fold(0.0f64, f64::max);
    let dhel = result
        .diagnostics
        .iter()
        .map(|d| (d.helicity - h0).abs())
        .fold(0.0f64, f64::max);
    cr.check("energy drift", denergy, 1e-10);
    cr.check("helicity drift", dhel, 1e-9);
    cr.finish();
}

#[test]
fn criterion_07_bihamiltonian_agreement() {
    let mut cr = Criterion::new(7, "bi-Hamiltonian right-hand sides", 10.0);
    let grid = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(grid);
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let state = FieldState::random_solenoidal(&spectral, seed, 3);
        let (e1, b1) = structure_rhs(&spectral, &state, HamiltonianStructure::Canonical).unwrap();
        let (e2, b2) = structure_rhs(&spectral, &state, HamiltonianStructure::Helicity).unwrap();
        worst = worst.max(e1.linf_diff(&e2)).max(b1.linf_diff(&b2));
    }
    cr.check("RHS deviation over 10 random solenoidal states", worst, 1e-12);
    cr.finish();
}

#[test]
fn criterion_08_potential_representation() {
    let mut cr = Criterion::new(8, "potential representation identities", 10.0);
    let grid = GridSpec::new(32, 2.0 * std::f64::consts::PI).unwrap();
    let spectral = Spectral::new(grid);
    let mut energy_dev = 0.0f64;
    let mut helicity_dev = 0.0f64;
    let mut roundtrip = 0.0f64;
    for seed in 0..10u64 {
        let state = FieldState::random_solenoidal(&spectral, 40 + seed, 2);
        let pots = spectral.potential_representation(&state).unwrap();
        energy_dev = energy_dev
            .max((state.energy() - spectral.energy_from_potentials(&pots).unwrap()).abs());
        helicity_dev = helicity_dev.max(
            (spectral.helicity_hamiltonian(&state)
                - spectral.helicity_from_potentials(&pots).unwrap())
            .abs(),
        );
        roundtrip = roundtrip.max(spectral.curl(&pots.a).linf_diff(&state.b));
        let inv = spectral.inverse_curl(&state.b).unwrap();
        roundtrip = roundtrip.max(spectral.curl(&inv).linf_diff(&state.b));
    }
    cr.check("energy identity", energy_dev, 1e-10);
    cr.check("helicity identity", helicity_dev, 1e-10);
    cr.check("curl of inverse curl vs identity", roundtrip, 1e-10);
    cr.finish();
}

#[test]
fn criterion_09_reduced_form_consistency() {
    let mut cr = Criterion::new(9, "reduced form vs bracket table", 5.0);
    let samples = Domain::default().sample_points(50, 4040);

    // Abelian random curvature with unit dual element, plus a heisenberg
    // curvature with a nontrivial gate-passing element.
    let cases: Vec<(&str, CurvatureField, DualElement, Option<GaugePotential>)> = vec![
        (
            "abelian uniform-b",
            CurvatureField::derived(GaugePotential::uniform_b(1.3)),
            DualElement::new(vec![1.0]),
            Some(GaugePotential::uniform_b(1.3)),
        ),
        (
            "abelian trig",
            CurvatureField::derived(trig(600, StructureConstants::abelian(1))),
            DualElement::new(vec![0.8]),
            Some(trig(600, StructureConstants::abelian(1))),
        ),
        (
            "heisenberg trig",
            CurvatureField::derived(trig(601, StructureConstants::heisenberg())),
            DualElement::new(vec![0.7, -0.4, 0.0]),
            Some(trig(601, StructureConstants::heisenberg())),
        ),
    ];
    for (label, curv, xi, pot) in &cases {
        let dev = bivector_consistency(xi, curv, &samples, ExecMode::default()).unwrap();
        cr.check(&format!("{label}: inverse vs table"), dev, 1e-12);
        let closed = closedness_residual(xi, curv, &samples, ExecMode::default()).unwrap();
        let bianchi =
            contracted_bianchi(xi, curv, pot.as_ref(), &samples, ExecMode::default()).unwrap();
        cr.check(
            &format!("{label}: closedness vs contracted residual"),
            (closed - bianchi).abs(),
            1e-10,
        );
    }

    // Independent-path sanity on a non-closed field: both routes report 1.
    let curv = CurvatureField::abelian_f12(FieldExpr::linear(2, 1.0));
    let xi = DualElement::new(vec![1.0]);
    let closed = closedness_residual(&xi, &curv, &samples, ExecMode::default()).unwrap();
    cr.check("injected field: closedness residual vs 1", (closed - 1.0).abs(), 1e-9);
    let _ = reduced_form(&xi, &curv, &samples[0]).unwrap();
    cr.finish();
}
