//! Hamiltonian particle dynamics `xdot = P(x) grad H(x)` under any bracket
//! table, with fixed-step integrators and conservation diagnostics.

use std::io::Write;

use nalgebra::DVector;

use crate::gauge::GaugePotential;
use crate::poisson::{BracketSpec, Observable, PhasePoint};
use crate::{Error, Result};

/// Particle Hamiltonian (unit mass).
#[derive(Debug, Clone)]
pub enum Hamiltonian {
    /// `H = |p|^2 / 2`.
    Free,
    /// `H = |p - sum_s y_s A^(s)(q)|^2 / 2`, the kinetic energy expressed in
    /// the momentum coordinate that absorbs the gauge field. Internal-free
    /// abelian points use unit charge.
    Coupled { potential: GaugePotential },
    /// Arbitrary observable.
    Custom(Observable),
}

impl Hamiltonian {
    pub fn value(&self, x: &PhasePoint) -> Result<f64> {
        match self {
            Hamiltonian::Free => Ok(0.5 * x.p.norm_squared()),
            Hamiltonian::Coupled { potential } => {
                let v = coupled_velocity(x, potential)?;
                Ok(0.5 * v.iter().map(|c| c * c).sum::<f64>())
            }
            Hamiltonian::Custom(obs) => Ok(obs.value(x)),
        }
    }

    pub fn gradient(&self, x: &PhasePoint) -> Result<DVector<f64>> {
        match self {
            Hamiltonian::Free => {
                let mut g = DVector::zeros(x.dim());
                for i in 0..3 {
                    g[3 + i] = x.p[i];
                }
                Ok(g)
            }
            Hamiltonian::Coupled { potential } => {
                let n = x.internal_dim();
                let v = coupled_velocity(x, potential)?;
                let da = potential.jacobian(&x.q_array())?;
                let a = potential.value(&x.q_array())?;
                let charge = |s: usize| -> f64 {
                    match &x.internal {
                        Some(iv) => iv.y[s],
                        None => 1.0,
                    }
                };
                let mut g = DVector::zeros(x.dim());
                for m in 0..3 {
                    g[m] = -(0..3)
                        .map(|j| {
                            v[j] * (0..potential.dim())
                                .map(|s| charge(s) * da[s][j][m])
                                .sum::<f64>()
                        })
                        .sum::<f64>();
                }
                for j in 0..3 {
                    g[3 + j] = v[j];
                }
                for s in 0..n {
                    g[6 + n + s] = -(0..3).map(|j| v[j] * a[s][j]).sum::<f64>();
                }
                Ok(g)
            }
            Hamiltonian::Custom(obs) => obs.gradient(x),
        }
    }
}

fn coupled_velocity(x: &PhasePoint, potential: &GaugePotential) -> Result<[f64; 3]> {
    let a = potential.value(&x.q_array())?;
    let n = potential.dim();
    match &x.internal {
        Some(iv) if iv.y.len() == n => Ok([0, 1, 2].map(|j| {
            x.p[j] - (0..n).map(|s| iv.y[s] * a[s][j]).sum::<f64>()
        })),
        Some(iv) => Err(Error::Shape {
            expected: n,
            got: iv.y.len(),
            context: "coupled Hamiltonian charge",
        }),
        None if n == 1 => Ok([0, 1, 2].map(|j| x.p[j] - a[0][j])),
        None => Err(Error::BracketConfig(
            "coupled Hamiltonian with n > 1 requires internal variables".into(),
        )),
    }
}

/// `P(x) grad H(x)` as a coordinate velocity.
pub fn vector_field(spec: &BracketSpec, h: &Hamiltonian, x: &PhasePoint) -> Result<DVector<f64>> {
    let pi = spec.bivector(x)?;
    let grad = h.gradient(x)?;
    Ok(pi * grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    /// Rotation-form splitting for the abelian magnetic bracket with the
    /// free Hamiltonian; preserves |p| exactly.
    Boris,
}

/// Fixed-step trajectory with per-step conservation diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub energy: Vec<f64>,
    /// One labeled series per Casimir candidate of the bracket's algebra.
    pub casimirs: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        self.energy
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }

    pub fn casimir_drift(&self, label: &str) -> Option<f64> {
        let series = &self.casimirs.iter().find(|(l, _)| l == label)?.1;
        let c0 = series.first()?;
        Some(series.iter().map(|c| (c - c0).abs()).fold(0.0, f64::max))
    }
}

/// Casimir candidates of the bracket's internal charge sector: `sum_s y_s^2`
/// for so(3), each `y_s` for abelian algebras, empty otherwise. They commute
/// with every charge variable and are conserved along any flow generated by
/// a charge-independent Hamiltonian.
pub fn casimirs(spec: &BracketSpec, x: &PhasePoint) -> Vec<(String, f64)> {
    let algebra = match spec {
        BracketSpec::ExtendedYm { curvature, .. } => curvature.algebra().clone(),
        BracketSpec::CanonicalizedYm { algebra } => algebra.clone(),
        _ => return Vec::new(),
    };
    let Some(iv) = &x.internal else {
        return Vec::new();
    };
    if algebra.is_abelian() {
        (0..iv.y.len())
            .map(|s| (format!("y{}", s + 1), iv.y[s]))
            .collect()
    } else if algebra.is_so3() {
        vec![("y_norm_sq".to_string(), iv.y.norm_squared())]
    } else {
        Vec::new()
    }
}

fn phase_point_from_coords(template: &PhasePoint, coords: &DVector<f64>) -> PhasePoint {
    let mut x = template.clone();
    for i in 0..x.dim() {
        x.set_coord(i, coords[i]);
    }
    x
}

/// Integrate `xdot = P grad H` from `x0` over `[0, t_end]` with fixed step
/// `dt`. The trajectory is sampled at `t = 0, dt, ..., round(t_end/dt) * dt`.
pub fn integrate(
    spec: &BracketSpec,
    h: &Hamiltonian,
    x0: &PhasePoint,
    t_end: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory> {
    if !(dt > 0.0) || t_end < dt {
        return Err(Error::Config(format!(
            "integration requires 0 < dt <= t_end (dt = {dt}, t_end = {t_end})"
        )));
    }
    spec.validate_point(x0)?;
    let steps = (t_end / dt).round() as usize;

    if method == Method::Boris {
        return boris_integrate(spec, h, x0, dt, steps);
    }

    let casimir_labels: Vec<String> = casimirs(spec, x0).iter().map(|(l, _)| l.clone()).collect();
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        casimirs: casimir_labels
            .iter()
            .map(|l| (l.clone(), Vec::with_capacity(steps + 1)))
            .collect(),
    };

    let mut x = x0.clone();
    let record = |traj: &mut Trajectory, t: f64, x: &PhasePoint| -> Result<()> {
        traj.times.push(t);
        traj.energy.push(h.value(x)?);
        for ((_, series), (_, value)) in traj.casimirs.iter_mut().zip(casimirs(spec, x)) {
            series.push(value);
        }
        traj.states.push(x.clone());
        Ok(())
    };
    record(&mut traj, 0.0, &x)?;

    for step in 1..=steps {
        let c = x.coords();
        let f = |coords: &DVector<f64>| -> Result<DVector<f64>> {
            vector_field(spec, h, &phase_point_from_coords(&x, coords))
        };
        let k1 = f(&c)?;
        let k2 = f(&(&c + &k1 * (dt / 2.0)))?;
        let k3 = f(&(&c + &k2 * (dt / 2.0)))?;
        let k4 = f(&(&c + &k3 * dt))?;
        let next = &c + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        x = phase_point_from_coords(&x, &next);
        if !x.is_finite() {
            return Err(Error::Diverged {
                step,
                time: step as f64 * dt,
            });
        }
        record(&mut traj, step as f64 * dt, &x)?;
    }
    Ok(traj)
}

fn boris_integrate(
    spec: &BracketSpec,
    h: &Hamiltonian,
    x0: &PhasePoint,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let BracketSpec::Magnetic { curvature } = spec else {
        return Err(Error::Config(
            "the Boris method applies to the magnetic bracket only".into(),
        ));
    };
    if !matches!(h, Hamiltonian::Free) {
        return Err(Error::Config(
            "the Boris method applies to the free Hamiltonian only".into(),
        ));
    }

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        casimirs: Vec::new(),
    };
    let mut x = x0.clone();
    traj.times.push(0.0);
    traj.energy.push(h.value(&x)?);
    traj.states.push(x.clone());

    for step in 1..=steps {
        // Drift to the half position, rotate the momentum in the local
        // magnetic axial vector beta_k = (F_23, F_31, F_12), drift again.
        let q_half = x.q + x.p * (dt / 2.0);
        let f = curvature.eval(&[q_half[0], q_half[1], q_half[2]])?;
        let beta = nalgebra::Vector3::new(f[0][1][2], f[0][2][0], f[0][0][1]);
        let t = beta * (dt / 2.0);
        let p_prime = x.p + x.p.cross(&t);
        let s = t * (2.0 / (1.0 + t.norm_squared()));
        let p_new = x.p + p_prime.cross(&s);
        x.q = q_half + p_new * (dt / 2.0);
        x.p = p_new;
        if !x.is_finite() {
            return Err(Error::Diverged {
                step,
                time: step as f64 * dt,
            });
        }
        traj.times.push(step as f64 * dt);
        traj.energy.push(h.value(&x)?);
        traj.states.push(x.clone());
    }
    Ok(traj)
}

/// Write a trajectory as CSV. Columns, in order:
/// `t, q1..q3, p1..p3[, u1..un, y1..yn], H[, <casimir labels>]`.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    let n = traj.states.first().map_or(0, |x| x.internal_dim());
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(crate::poisson::coord_names(n));
    header.push("H".into());
    header.extend(traj.casimirs.iter().map(|(l, _)| l.clone()));
    writeln!(w, "{}", header.join(","))?;
    for (idx, x) in traj.states.iter().enumerate() {
        let mut row = Vec::with_capacity(header.len());
        row.push(format!("{:.16e}", traj.times[idx]));
        for i in 0..x.dim() {
            row.push(format!("{:.16e}", x.coord(i)));
        }
        row.push(format!("{:.16e}", traj.energy[idx]));
        for (_, series) in &traj.casimirs {
            row.push(format!("{:.16e}", series[idx]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::CurvatureField;
    use crate::lie_algebra::StructureConstants;
    use approx::assert_abs_diff_eq;

    fn magnetic_spec(b: f64) -> BracketSpec {
        BracketSpec::magnetic(CurvatureField::derived(GaugePotential::uniform_b(b))).unwrap()
    }

    #[test]
    fn canonical_free_vector_field() {
        let x = PhasePoint::canonical([0.1, 0.2, 0.3], [1.0, -2.0, 0.5]);
        let v = vector_field(&BracketSpec::Canonical, &Hamiltonian::Free, &x).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(v[i], x.p[i], epsilon = 1e-15);
            assert_abs_diff_eq!(v[3 + i], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn magnetic_vector_field_matches_matrix_product_oracle() {
        let b = 1.3;
        let spec = magnetic_spec(b);
        let x = PhasePoint::canonical([0.2, -0.1, 0.4], [0.7, -0.9, 0.3]);
        let v = vector_field(&spec, &Hamiltonian::Free, &x).unwrap();
        // Hand-derived from the bivector: qdot = p, pdot_i = sum_j F_ij p_j.
        assert_abs_diff_eq!(v[3], b * x.p[1], epsilon = 1e-13);
        assert_abs_diff_eq!(v[4], -b * x.p[0], epsilon = 1e-13);
        assert_abs_diff_eq!(v[5], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn zero_field_free_motion_is_exactly_linear() {
        let x0 = PhasePoint::canonical([0.0, 1.0, -1.0], [0.5, 0.25, -0.125]);
        let traj = integrate(
            &BracketSpec::Canonical,
            &Hamiltonian::Free,
            &x0,
            1.0,
            0.125,
            Method::Rk4,
        )
        .unwrap();
        for (t, x) in traj.times.iter().zip(traj.states.iter()) {
            for i in 0..3 {
                assert_abs_diff_eq!(x.q[i], x0.q[i] + x0.p[i] * t, epsilon = 1e-15);
                assert_eq!(x.p[i], x0.p[i]);
            }
        }
    }

    #[test]
    fn larmor_orbit_radius_and_energy() {
        let spec = magnetic_spec(1.0);
        let x0 = PhasePoint::canonical([0.0; 3], [1.0, 0.0, 0.0]);
        let t_end = 2.0 * std::f64::consts::PI;
        let dt = 1e-3;
        let traj = integrate(&spec, &Hamiltonian::Free, &x0, t_end, dt, Method::Rk4).unwrap();
        // Analytic solution: circle of radius 1 centered at (0, -1, 0).
        for x in &traj.states {
            let r = ((x.q[0]).powi(2) + (x.q[1] + 1.0).powi(2)).sqrt();
            assert!((r - 1.0).abs() < 1e-6, "radius deviation {}", (r - 1.0).abs());
        }
        // Energy bound |H(t) - H(0)| <= C h^4 t with C calibrated here.
        let drift = traj.energy_drift();
        assert!(
            drift <= 1.0 * dt.powi(4) * t_end,
            "energy drift {drift:e} exceeds h^4 bound"
        );
    }

    #[test]
    fn boris_and_rk4_agree_to_second_order_on_larmor() {
        let spec = magnetic_spec(1.0);
        let x0 = PhasePoint::canonical([0.0; 3], [1.0, 0.0, 0.0]);
        let t_end = 2.0 * std::f64::consts::PI;
        let dt = 1e-3;
        let rk4 = integrate(&spec, &Hamiltonian::Free, &x0, t_end, dt, Method::Rk4).unwrap();
        let boris = integrate(&spec, &Hamiltonian::Free, &x0, t_end, dt, Method::Boris).unwrap();
        let last = rk4.states.len() - 1;
        let diff = (rk4.states[last].q - boris.states[last].q).norm();
        assert!(diff <= 2.0 * dt * dt, "phase-space gap {diff:e}");
        // Boris conserves |p| exactly up to rounding.
        let pb = boris.states[last].p.norm();
        assert_abs_diff_eq!(pb, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn extended_zero_potential_keeps_charges_constant() {
        let pot = GaugePotential::zero(StructureConstants::so3());
        let spec =
            BracketSpec::extended_ym(CurvatureField::derived(pot.clone()), pot).unwrap();
        let x0 = PhasePoint::with_internal(
            [0.1, 0.0, -0.2],
            [0.3, 0.4, 0.0],
            vec![0.0; 3],
            vec![0.5, -0.5, 1.0],
        )
        .unwrap();
        let v = vector_field(&spec, &Hamiltonian::Free, &x0).unwrap();
        for s in 0..3 {
            assert_abs_diff_eq!(v[9 + s], 0.0, epsilon = 1e-14);
        }
        let traj = integrate(&spec, &Hamiltonian::Free, &x0, 1.0, 0.01, Method::Rk4).unwrap();
        let drift = traj.casimir_drift("y_norm_sq").unwrap();
        assert!(drift <= 1e-12, "charge norm drift {drift:e}");
    }

    #[test]
    fn casimir_values_and_commutation() {
        let pot = GaugePotential::zero(StructureConstants::so3());
        let spec =
            BracketSpec::extended_ym(CurvatureField::derived(pot.clone()), pot).unwrap();
        let x = PhasePoint::with_internal([0.0; 3], [0.0; 3], vec![0.0; 3], vec![0.0, 0.0, 2.0])
            .unwrap();
        let cs = casimirs(&spec, &x);
        assert_eq!(cs.len(), 1);
        assert_abs_diff_eq!(cs[0].1, 4.0, epsilon = 1e-15);

        // sum y^2 commutes with each y_k under the charge block.
        let casimir = Observable::new("y_norm_sq", |x: &PhasePoint| {
            x.internal.as_ref().map_or(0.0, |iv| iv.y.norm_squared())
        });
        let x = PhasePoint::with_internal(
            [0.0; 3],
            [0.0; 3],
            vec![0.1, 0.2, 0.3],
            vec![0.7, -0.4, 0.9],
        )
        .unwrap();
        for k in 0..3 {
            let yk = Observable::coordinate(9 + k);
            let br = spec.bracket(&casimir, &yk, &x).unwrap();
            assert_abs_diff_eq!(br, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn abelian_casimirs_are_each_charge() {
        let pot = GaugePotential::zero(StructureConstants::abelian(2));
        let spec =
            BracketSpec::extended_ym(CurvatureField::derived(pot.clone()), pot).unwrap();
        let x = PhasePoint::with_internal(
            [0.0; 3],
            [0.0; 3],
            vec![0.0, 0.0],
            vec![3.0, 5.0],
        )
        .unwrap();
        let cs = casimirs(&spec, &x);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0], ("y1".to_string(), 3.0));
        assert_eq!(cs[1], ("y2".to_string(), 5.0));
    }

    #[test]
    fn boris_requires_magnetic_free() {
        let x0 = PhasePoint::canonical([0.0; 3], [1.0, 0.0, 0.0]);
        let err = integrate(
            &BracketSpec::Canonical,
            &Hamiltonian::Free,
            &x0,
            1.0,
            0.1,
            Method::Boris,
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn trajectory_csv_layout() {
        let spec = magnetic_spec(1.0);
        let x0 = PhasePoint::canonical([0.0; 3], [1.0, 0.0, 0.0]);
        let traj = integrate(&spec, &Hamiltonian::Free, &x0, 0.1, 0.05, Method::Rk4).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,q1,q2,q3,p1,p2,p3,H");
        assert_eq!(lines.count(), 3);
    }
}
