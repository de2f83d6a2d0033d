//! Vacuum field evolution under either Hamiltonian structure.
//!
//! Both structures generate the same right-hand side `Edot = rot B`,
//! `Bdot = -rot E`, but assemble it along different functional-derivative
//! routes:
//!
//! - `Canonical` works in the `(S, B)` chart with `rot S = -E` and the energy
//!   Hamiltonian: `Sdot = -dH/dB = -B`, `Bdot = dH/dS = rot rot S`, so the
//!   magnetic equation passes through `inverse_curl` and a double curl;
//! - `Helicity` pairs `B` with `E` directly under the helicity Hamiltonian:
//!   `Edot = dHbar/dB = rot B`, `Bdot = -dHbar/dE = -rot E`.
//!
//! Time stepping is classical RK4 applied to the spectral representation,
//! where both routes are pointwise in `k` and derivatives are exact; each
//! Fourier mode is advanced independently and diagnostics accumulate via
//! Parseval sums. Chunked accumulators combine in index order, so results
//! are bitwise reproducible across thread counts.

use rustfft::num_complex::Complex64;

use crate::exec::{self, ExecMode, MODE_CHUNK};
use crate::{Error, Result};

use super::grid::VectorField;
use super::spectral::{cross_real_complex, i_times, Spectral};
use super::state::FieldState;

/// Which Hamiltonian structure assembles the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianStructure {
    Canonical,
    Helicity,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    pub structure: HamiltonianStructure,
    /// Emit a state snapshot every this many steps (step 0 included).
    pub snapshot_stride: Option<usize>,
}

/// Per-step conservation diagnostics (Parseval sums over the spectrum).
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub t: f64,
    pub energy: f64,
    pub helicity: f64,
    /// `|| div E ||_2`
    pub div_e: f64,
    /// `|| div B ||_2`
    pub div_b: f64,
}

#[derive(Debug)]
pub struct EvolveResult {
    pub final_state: FieldState,
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<(f64, FieldState)>,
    /// Set when a divergence constraint drifted beyond 1e-8 during the run.
    pub constraint_warning: Option<String>,
}

/// Divergence drift beyond this triggers the constraint warning.
const CONSTRAINT_WARN: f64 = 1e-8;

#[derive(Clone, Copy, Default)]
struct Mode {
    e: [Complex64; 3],
    b: [Complex64; 3],
}

#[derive(Clone, Copy, Default)]
struct DiagSums {
    e2: f64,
    b2: f64,
    hel_e: f64,
    hel_b: f64,
    div_e2: f64,
    div_b2: f64,
}

impl DiagSums {
    fn merge(self, other: DiagSums) -> DiagSums {
        DiagSums {
            e2: self.e2 + other.e2,
            b2: self.b2 + other.b2,
            hel_e: self.hel_e + other.hel_e,
            hel_b: self.hel_b + other.hel_b,
            div_e2: self.div_e2 + other.div_e2,
            div_b2: self.div_b2 + other.div_b2,
        }
    }

    fn accumulate(&mut self, k: [f64; 3], m: &Mode) {
        let norm = |v: [Complex64; 3]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        self.e2 += norm(m.e);
        self.b2 += norm(m.b);
        let rot = |v: [Complex64; 3]| {
            let c = cross_real_complex(k, v);
            [i_times(c[0]), i_times(c[1]), i_times(c[2])]
        };
        let dot_re = |a: [Complex64; 3], b: [Complex64; 3]| {
            (0..3).map(|c| (a[c] * b[c].conj()).re).sum::<f64>()
        };
        self.hel_e += dot_re(rot(m.e), m.e);
        self.hel_b += dot_re(rot(m.b), m.b);
        let div = |v: [Complex64; 3]| (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]).norm_sqr();
        self.div_e2 += div(m.e);
        self.div_b2 += div(m.b);
    }

    fn row(&self, t: f64, volume: f64) -> StepDiagnostics {
        StepDiagnostics {
            t,
            energy: 0.5 * volume * (self.e2 + self.b2),
            helicity: 0.5 * volume * (self.hel_e + self.hel_b),
            div_e: (volume * self.div_e2).sqrt(),
            div_b: (volume * self.div_b2).sqrt(),
        }
    }
}

#[inline]
fn rhs_helicity(k: [f64; 3], e: [Complex64; 3], b: [Complex64; 3]) -> ([Complex64; 3], [Complex64; 3]) {
    let rot_b = cross_real_complex(k, b);
    let rot_e = cross_real_complex(k, e);
    (
        [i_times(rot_b[0]), i_times(rot_b[1]), i_times(rot_b[2])],
        [-i_times(rot_e[0]), -i_times(rot_e[1]), -i_times(rot_e[2])],
    )
}

#[inline]
fn rhs_canonical(
    k: [f64; 3],
    e: [Complex64; 3],
    b: [Complex64; 3],
) -> ([Complex64; 3], [Complex64; 3]) {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return ([Complex64::default(); 3], [Complex64::default(); 3]);
    }
    // S = rot^-1(-E), Sdot = -B, Edot = -rot Sdot, Bdot = rot rot S.
    let neg_e = [-e[0], -e[1], -e[2]];
    let ce = cross_real_complex(k, neg_e);
    let s = [
        i_times(ce[0]) / k2,
        i_times(ce[1]) / k2,
        i_times(ce[2]) / k2,
    ];
    let sdot = [-b[0], -b[1], -b[2]];
    let c_sdot = cross_real_complex(k, sdot);
    let edot = [
        -i_times(c_sdot[0]),
        -i_times(c_sdot[1]),
        -i_times(c_sdot[2]),
    ];
    let cs = cross_real_complex(k, s);
    let rot_s = [i_times(cs[0]), i_times(cs[1]), i_times(cs[2])];
    let c2 = cross_real_complex(k, rot_s);
    let bdot = [i_times(c2[0]), i_times(c2[1]), i_times(c2[2])];
    (edot, bdot)
}

/// Right-hand side `(Edot, Bdot)` assembled through the chosen structure's
/// functional-derivative route, in physical space.
pub fn structure_rhs(
    spectral: &Spectral,
    state: &FieldState,
    structure: HamiltonianStructure,
) -> Result<(VectorField, VectorField)> {
    match structure {
        HamiltonianStructure::Helicity => {
            // Edot = dHbar/dB = rot B; Bdot = -dHbar/dE = -rot E.
            Ok((spectral.curl(&state.b), spectral.curl(&state.e).scaled(-1.0)))
        }
        HamiltonianStructure::Canonical => {
            // S-chart: rot S = -E, Sdot = -dH/dB = -B, Bdot = dH/dS = rot rot S.
            let s = spectral.inverse_curl(&state.e.scaled(-1.0))?;
            let sdot = state.b.scaled(-1.0);
            let edot = spectral.curl(&sdot).scaled(-1.0);
            let bdot = spectral.curl(&spectral.curl(&s));
            Ok((edot, bdot))
        }
    }
}

fn rk4_step<F>(modes: &mut [Mode], spectral: &Spectral, mode: ExecMode, dt: f64, rhs: F) -> DiagSums
where
    F: Fn([f64; 3], [Complex64; 3], [Complex64; 3]) -> ([Complex64; 3], [Complex64; 3])
        + Sync
        + Send
        + Copy,
{
    let n = spectral.grid().n();
    let kd = spectral.wavenumbers().to_vec();
    exec::fold_chunks_mut(
        mode,
        modes,
        MODE_CHUNK,
        move |offset, chunk| {
            let mut sums = DiagSums::default();
            for (j, m) in chunk.iter_mut().enumerate() {
                let idx = offset + j;
                let (ix, iy, iz) = (idx % n, (idx / n) % n, idx / (n * n));
                let k = [kd[ix], kd[iy], kd[iz]];
                let (e, b) = (m.e, m.b);
                let (k1e, k1b) = rhs(k, e, b);
                let (k2e, k2b) = rhs(k, axpy(e, k1e, dt / 2.0), axpy(b, k1b, dt / 2.0));
                let (k3e, k3b) = rhs(k, axpy(e, k2e, dt / 2.0), axpy(b, k2b, dt / 2.0));
                let (k4e, k4b) = rhs(k, axpy(e, k3e, dt), axpy(b, k3b, dt));
                for c in 0..3 {
                    m.e[c] = e[c] + (k1e[c] + (k2e[c] + k3e[c]) * 2.0 + k4e[c]) * (dt / 6.0);
                    m.b[c] = b[c] + (k1b[c] + (k2b[c] + k3b[c]) * 2.0 + k4b[c]) * (dt / 6.0);
                }
                sums.accumulate(k, m);
            }
            sums
        },
        DiagSums::merge,
        DiagSums::default(),
    )
}

#[inline]
fn axpy(x: [Complex64; 3], d: [Complex64; 3], a: f64) -> [Complex64; 3] {
    [x[0] + d[0] * a, x[1] + d[1] * a, x[2] + d[2] * a]
}

fn diagnostics_only(modes: &[Mode], spectral: &Spectral, t: f64) -> StepDiagnostics {
    let n = spectral.grid().n();
    let kd = spectral.wavenumbers();
    let mut sums = DiagSums::default();
    for (idx, m) in modes.iter().enumerate() {
        let (ix, iy, iz) = (idx % n, (idx / n) % n, idx / (n * n));
        sums.accumulate([kd[ix], kd[iy], kd[iz]], m);
    }
    sums.row(t, spectral.grid().volume())
}

fn to_modes(spectral: &Spectral, state: &FieldState) -> Vec<Mode> {
    let e = spectral.forward_vector(&state.e);
    let b = spectral.forward_vector(&state.b);
    (0..spectral.grid().points())
        .map(|idx| Mode {
            e: [e[0][idx], e[1][idx], e[2][idx]],
            b: [b[0][idx], b[1][idx], b[2][idx]],
        })
        .collect()
}

fn from_modes(spectral: &Spectral, modes: &[Mode]) -> FieldState {
    let collect = |pick: fn(&Mode) -> [Complex64; 3]| {
        let mut spectra = [
            vec![Complex64::default(); modes.len()],
            vec![Complex64::default(); modes.len()],
            vec![Complex64::default(); modes.len()],
        ];
        for (idx, m) in modes.iter().enumerate() {
            let v = pick(m);
            for c in 0..3 {
                spectra[c][idx] = v[c];
            }
        }
        spectral.inverse_vector(&spectra)
    };
    FieldState {
        e: collect(|m| m.e),
        b: collect(|m| m.b),
    }
}

/// Integrate the vacuum equations from `initial` to `t_end`. The step is
/// uniform; when `t_end` is not a step multiple, one shorter remainder step
/// lands exactly on `t_end`. Diagnostics are recorded at every step edge.
pub fn evolve(spectral: &Spectral, initial: &FieldState, opts: &EvolveOptions) -> Result<EvolveResult> {
    if !(opts.dt > 0.0) || opts.t_end < opts.dt {
        return Err(Error::Config(format!(
            "evolution requires 0 < dt <= t_end (dt = {}, t_end = {})",
            opts.dt, opts.t_end
        )));
    }
    let exec_mode = spectral.exec_mode();
    let mut modes = to_modes(spectral, initial);
    let volume = spectral.grid().volume();

    let full_steps = (opts.t_end / opts.dt + 1e-9).floor() as usize;
    let remainder = opts.t_end - full_steps as f64 * opts.dt;
    let has_remainder = remainder > 1e-12 * opts.t_end.max(1.0);
    let total_steps = full_steps + usize::from(has_remainder);

    let mut diagnostics = Vec::with_capacity(total_steps + 1);
    diagnostics.push(diagnostics_only(&modes, spectral, 0.0));
    let mut snapshots = Vec::new();
    if opts.snapshot_stride.is_some() {
        snapshots.push((0.0, initial.clone()));
    }
    let mut warning = None;

    let mut t = 0.0;
    for step in 1..=total_steps {
        let dt = if step <= full_steps { opts.dt } else { remainder };
        t = if step == total_steps {
            opts.t_end
        } else {
            t + dt
        };
        let sums = match opts.structure {
            HamiltonianStructure::Helicity => {
                rk4_step(&mut modes, spectral, exec_mode, dt, rhs_helicity)
            }
            HamiltonianStructure::Canonical => {
                rk4_step(&mut modes, spectral, exec_mode, dt, rhs_canonical)
            }
        };
        let row = sums.row(t, volume);
        if !row.energy.is_finite() {
            return Err(Error::Diverged { step, time: t });
        }
        if warning.is_none() && (row.div_e > CONSTRAINT_WARN || row.div_b > CONSTRAINT_WARN) {
            warning = Some(format!(
                "divergence constraint drifted beyond {CONSTRAINT_WARN:e} at t = {t}: div_e = {:e}, div_b = {:e}",
                row.div_e, row.div_b
            ));
        }
        diagnostics.push(row);
        if let Some(stride) = opts.snapshot_stride {
            if stride > 0 && step % stride == 0 && step != total_steps {
                snapshots.push((t, from_modes(spectral, &modes)));
            }
        }
    }

    let final_state = from_modes(spectral, &modes);
    if opts.snapshot_stride.is_some() {
        snapshots.push((opts.t_end, final_state.clone()));
    }
    Ok(EvolveResult {
        final_state,
        diagnostics,
        snapshots,
        constraint_warning: warning,
    })
}
