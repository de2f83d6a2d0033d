//! Reduced symplectic two-forms over `(q, p)` and their consistency checks:
//! closedness (via the contracted field-equation residual) and agreement of
//! the matrix inverse with the reduced bracket table.

use nalgebra::Matrix6;

use crate::exec::{self, ExecMode};
use crate::gauge::{central4, CurvatureField, GaugePotential, FD_STEP};
use crate::lie_algebra::{DualElement, AXIOM_TOLERANCE};
use crate::poisson::{BracketSpec, PhasePoint};
use crate::{Error, Result};

/// The reduced two-form at `q` over coordinates `(q^1..q^3, p_1..p_3)`:
/// canonical block plus the magnetic block `M_ij = sum_s e_s F^(s)_ij(q)` in
/// the `dq ^ dq` sector. Construction enforces the invariance gate on `xi`.
pub fn reduced_form(
    xi: &DualElement,
    curvature: &CurvatureField,
    q: &[f64; 3],
) -> Result<Matrix6<f64>> {
    curvature.algebra().check_invariance(xi, AXIOM_TOLERANCE)?;
    let f = curvature.eval(q)?;
    let mut omega = Matrix6::zeros();
    for i in 0..3 {
        // <dp, ^ dq>: omega(d_p, d_q) = +1, omega(d_q, d_p) = -1.
        omega[(3 + i, i)] = 1.0;
        omega[(i, 3 + i)] = -1.0;
    }
    for i in 0..3 {
        for j in 0..3 {
            let m: f64 = (0..xi.dim()).map(|s| xi.component(s) * f[s][i][j]).sum();
            omega[(i, j)] = m;
        }
    }
    Ok(omega)
}

/// Max over samples of the single independent component of `d omega`,
/// computed by finite differences of the contracted magnetic block with the
/// shared stencil. Zero iff the reduced form is closed on the sample.
pub fn closedness_residual(
    xi: &DualElement,
    curvature: &CurvatureField,
    samples: &[[f64; 3]],
    mode: ExecMode,
) -> Result<f64> {
    curvature.algebra().check_invariance(xi, AXIOM_TOLERANCE)?;
    let m_entry = |q: &[f64; 3], i: usize, j: usize| -> Result<f64> {
        let f = curvature.eval(q)?;
        Ok((0..xi.dim()).map(|s| xi.component(s) * f[s][i][j]).sum())
    };
    let values = exec::try_map_collect(mode, samples, |q| {
        // (d omega)_123 = d_1 M_23 + d_2 M_31 + d_3 M_12.
        let mut total = 0.0;
        for (axis, (i, j)) in [(0usize, (1usize, 2usize)), (1, (2, 0)), (2, (0, 1))] {
            let d = central4(
                |v| {
                    let mut qq = *q;
                    qq[axis] = v;
                    m_entry(&qq, i, j).expect("entry evaluation inside domain stencil")
                },
                q[axis],
                FD_STEP,
            );
            total += d;
        }
        Ok(total.abs())
    })?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// The independent route to the same quantity: the dual-element contraction
/// of the field-equation residual, `|sum_s e_s R^(s)_123|`, maximized over
/// the samples. On gate-passing elements it equals [`closedness_residual`].
pub fn contracted_bianchi(
    xi: &DualElement,
    curvature: &CurvatureField,
    potential: Option<&GaugePotential>,
    samples: &[[f64; 3]],
    mode: ExecMode,
) -> Result<f64> {
    let values = exec::try_map_collect(mode, samples, |q| {
        let r = curvature.bianchi_residual(potential, q)?;
        let c: f64 = (0..xi.dim())
            .map(|s| xi.component(s) * r[s][0][1][2])
            .sum();
        Ok(c.abs())
    })?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Max entrywise deviation between `inverse(reduced_form)` and the reduced
/// bracket table over the samples.
pub fn bivector_consistency(
    xi: &DualElement,
    curvature: &CurvatureField,
    samples: &[[f64; 3]],
    mode: ExecMode,
) -> Result<f64> {
    let spec = BracketSpec::reduced_ym(curvature.clone(), xi.clone())?;
    let values = exec::try_map_collect(mode, samples, |q| {
        let omega = reduced_form(xi, curvature, q)?;
        let inv = omega.try_inverse().ok_or_else(|| {
            Error::Numerical(format!("reduced form singular at q = {q:?}"))
        })?;
        let x = PhasePoint::canonical(*q, [0.0; 3]);
        let pi = spec.bivector(&x)?;
        let mut worst = 0.0f64;
        for a in 0..6 {
            for b in 0..6 {
                worst = worst.max((inv[(a, b)] - pi[(a, b)]).abs());
            }
        }
        Ok(worst)
    })?;
    Ok(values.into_iter().fold(0.0, f64::max))
}
