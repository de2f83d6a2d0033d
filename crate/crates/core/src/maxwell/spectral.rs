//! Fourier-space differential operators on the periodic grid.
//!
//! Derivatives are spectral and therefore exact (to rounding) for
//! band-limited fields, so identities like `div curl = 0` and
//! `curl inverse_curl = id` hold at the 1e-12 level and constraint drift in
//! the evolution tests measures the structure, not the discretization.
//!
//! The forward transform is normalized by `1/n^3`: stored spectra are the
//! Fourier coefficients of `f(x) = sum_m fhat_m exp(i k_m . x)`, and grid
//! quadrature equals `V * sum_m |fhat_m|^2` (Parseval).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec::{self, ExecMode};
use crate::{Error, Result};

use super::grid::{GridSpec, ScalarField, VectorField};
use super::state::{ChargeDensity, FieldState, PotentialState};

/// Absolute tolerance on divergence and mean defects for spectral inversion.
pub const INVERSE_CURL_TOLERANCE: f64 = 1e-10;

/// FFT plans and wavenumber tables for one grid.
pub struct Spectral {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Signed derivative wavenumber per axis index; the Nyquist mode is
    /// zeroed so odd-order derivatives stay real-symmetric.
    kd: Vec<f64>,
    mode: ExecMode,
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        Self::with_mode(grid, ExecMode::default())
    }

    pub fn with_mode(grid: GridSpec, mode: ExecMode) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n();
        let base = 2.0 * std::f64::consts::PI / grid.l();
        let kd = (0..n)
            .map(|m| {
                if m == n / 2 {
                    0.0
                } else if m <= n / 2 {
                    base * m as f64
                } else {
                    base * (m as f64 - n as f64)
                }
            })
            .collect();
        Self {
            grid,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            kd,
            mode,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn exec_mode(&self) -> ExecMode {
        self.mode
    }

    pub(crate) fn wavenumbers(&self) -> &[f64] {
        &self.kd
    }

    /// In-place 3D FFT over all three axes.
    fn fft3(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.grid.n();
        let plan = if inverse { &self.inv } else { &self.fwd };
        let slab = n * n;

        // x-axis: pencils are contiguous, whole slabs at a time.
        exec::for_each_chunk_mut(self.mode, data, slab, |_, chunk| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(chunk, &mut scratch);
        });

        // y-axis: gather strided pencils within each contiguous z-slab.
        exec::for_each_chunk_mut(self.mode, data, slab, |_, chunk| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            let mut pencil = vec![Complex64::default(); n];
            for ix in 0..n {
                for iy in 0..n {
                    pencil[iy] = chunk[iy * n + ix];
                }
                plan.process_with_scratch(&mut pencil, &mut scratch);
                for iy in 0..n {
                    chunk[iy * n + ix] = pencil[iy];
                }
            }
        });

        // z-axis: pencils stride across the whole array; sequential pass.
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut pencil = vec![Complex64::default(); n];
        for iy in 0..n {
            for ix in 0..n {
                let base = iy * n + ix;
                for iz in 0..n {
                    pencil[iz] = data[iz * slab + base];
                }
                plan.process_with_scratch(&mut pencil, &mut scratch);
                for iz in 0..n {
                    data[iz * slab + base] = pencil[iz];
                }
            }
        }
    }

    pub fn forward_scalar(&self, data: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.grid.points() as f64;
        let mut out: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft3(&mut out, false);
        for v in out.iter_mut() {
            *v *= scale;
        }
        out
    }

    pub fn inverse_scalar(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.fft3(&mut buf, true);
        buf.into_iter().map(|v| v.re).collect()
    }

    pub fn forward_vector(&self, field: &VectorField) -> [Vec<Complex64>; 3] {
        [0, 1, 2].map(|c| self.forward_scalar(field.comp(c)))
    }

    pub fn inverse_vector(&self, spectra: &[Vec<Complex64>; 3]) -> VectorField {
        let comps = [0, 1, 2].map(|c| self.inverse_scalar(&spectra[c]));
        VectorField::from_components(self.grid, comps).expect("matched grid")
    }

    #[inline]
    fn k_at(&self, idx: usize) -> [f64; 3] {
        let n = self.grid.n();
        let ix = idx % n;
        let iy = (idx / n) % n;
        let iz = idx / (n * n);
        [self.kd[ix], self.kd[iy], self.kd[iz]]
    }

    /// `curl F` via `i k x Fhat`.
    pub fn curl(&self, field: &VectorField) -> VectorField {
        let f = self.forward_vector(field);
        let mut out = [
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
        ];
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            let v = [f[0][idx], f[1][idx], f[2][idx]];
            let c = cross_real_complex(k, v);
            for comp in 0..3 {
                out[comp][idx] = i_times(c[comp]);
            }
        }
        self.inverse_vector(&out)
    }

    /// `div F` via `i k . Fhat`.
    pub fn div(&self, field: &VectorField) -> ScalarField {
        let f = self.forward_vector(field);
        let mut out = vec![Complex64::default(); self.grid.points()];
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            let dot = f[0][idx] * k[0] + f[1][idx] * k[1] + f[2][idx] * k[2];
            out[idx] = i_times(dot);
        }
        ScalarField::from_data(self.grid, self.inverse_scalar(&out)).expect("matched grid")
    }

    /// `grad f` via `i k fhat`.
    pub fn grad(&self, field: &ScalarField) -> VectorField {
        let f = self.forward_scalar(field.data());
        let mut out = [
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
        ];
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            for comp in 0..3 {
                out[comp][idx] = i_times(f[idx] * k[comp]);
            }
        }
        self.inverse_vector(&out)
    }

    /// `laplacian f` via `-|k|^2 fhat`.
    pub fn laplacian(&self, field: &ScalarField) -> ScalarField {
        let mut f = self.forward_scalar(field.data());
        for (idx, v) in f.iter_mut().enumerate() {
            let k = self.k_at(idx);
            *v *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        }
        ScalarField::from_data(self.grid, self.inverse_scalar(&f)).expect("matched grid")
    }

    /// Project onto the mean-free solenoidal subspace:
    /// `Fhat <- Fhat - k (k . Fhat) / |k|^2`, zero mode removed.
    pub fn project_solenoidal(&self, field: &VectorField) -> VectorField {
        let mut f = self.forward_vector(field);
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                for comp in 0..3 {
                    f[comp][idx] = Complex64::default();
                }
                continue;
            }
            let dot = (f[0][idx] * k[0] + f[1][idx] * k[1] + f[2][idx] * k[2]) / k2;
            for comp in 0..3 {
                f[comp][idx] -= dot * k[comp];
            }
        }
        self.inverse_vector(&f)
    }

    /// Measured defects for the spectral curl inversion: L2 norm of the
    /// divergence and the largest componentwise mean.
    pub fn inversion_defects(&self, field: &VectorField) -> (f64, f64) {
        let div = self.div(field).l2_norm();
        let mean = (0..3)
            .map(|c| {
                field.comp(c).iter().sum::<f64>().abs() / self.grid.points() as f64
            })
            .fold(0.0f64, f64::max);
        (div, mean)
    }

    /// The unique mean-free solenoidal `A` with `curl A = field`. Fails with
    /// the measured defects when the input is not divergence-free and
    /// mean-free to [`INVERSE_CURL_TOLERANCE`].
    pub fn inverse_curl(&self, field: &VectorField) -> Result<VectorField> {
        let (div_defect, mean_defect) = self.inversion_defects(field);
        if div_defect > INVERSE_CURL_TOLERANCE || mean_defect > INVERSE_CURL_TOLERANCE {
            return Err(Error::NotInRange {
                context: "inverse curl",
                div_defect,
                mean_defect,
            });
        }
        let f = self.forward_vector(field);
        let mut out = [
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
        ];
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let v = [f[0][idx], f[1][idx], f[2][idx]];
            let c = cross_real_complex(k, v);
            for comp in 0..3 {
                out[comp][idx] = i_times(c[comp]) / k2;
            }
        }
        Ok(self.inverse_vector(&out))
    }

    /// Electric field `E = grad phi` with `laplacian phi = rho`; the
    /// spectral solution of the charge constraint `div E = rho`.
    pub fn efield_from_charge(&self, rho: &ChargeDensity) -> VectorField {
        let mut phi = self.forward_scalar(rho.rho.data());
        for (idx, v) in phi.iter_mut().enumerate() {
            let k = self.k_at(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            *v = if k2 == 0.0 { Complex64::default() } else { -*v / k2 };
        }
        let mut out = [
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
            vec![Complex64::default(); self.grid.points()],
        ];
        for idx in 0..self.grid.points() {
            let k = self.k_at(idx);
            for comp in 0..3 {
                out[comp][idx] = i_times(phi[idx] * k[comp]);
            }
        }
        self.inverse_vector(&out)
    }

    /// Second Hamiltonian `(rot E, E)/2 + (rot B, B)/2`, conserved by the
    /// vacuum flow; measures field-line linkage.
    pub fn helicity_hamiltonian(&self, state: &FieldState) -> f64 {
        let rot_e = self.curl(&state.e);
        let rot_b = self.curl(&state.b);
        0.5 * (rot_e.inner(&state.e) + rot_b.inner(&state.b))
    }

    /// Momentum map of the two-potential gauge action and the constraint
    /// residuals.
    pub fn momentum_maps(
        &self,
        state: &FieldState,
        rho: Option<&ChargeDensity>,
    ) -> MomentumMapReport {
        let div_e = self.div(&state.e);
        let div_b = self.div(&state.b);
        let res_div_e = match rho {
            Some(rho) => {
                let data: Vec<f64> = div_e
                    .data()
                    .iter()
                    .zip(rho.rho.data().iter())
                    .map(|(d, r)| d - r)
                    .collect();
                ScalarField::from_data(self.grid, data)
                    .expect("matched grid")
                    .l2_norm()
            }
            None => div_e.l2_norm(),
        };
        let res_div_b = div_b.l2_norm();
        let l_b = ScalarField::from_data(
            self.grid,
            div_b.data().iter().map(|v| -v).collect(),
        )
        .expect("matched grid");
        MomentumMapReport {
            l_e: div_e,
            l_b,
            res_div_e,
            res_div_b,
        }
    }

    /// Momentum map `-div Y` of the potential-space gauge action, with its
    /// residual norm.
    pub fn potential_momentum_map(&self, pstate: &PotentialState) -> (ScalarField, f64) {
        let div_y = self.div(&pstate.y);
        let res = div_y.l2_norm();
        let l = ScalarField::from_data(self.grid, div_y.data().iter().map(|v| -v).collect())
            .expect("matched grid");
        (l, res)
    }

    /// Potential representation `A = rot^-1 B`, `Y = -rot E`, `S = rot^-1(-E)`.
    /// Needs `div B = 0`; the vorticity potential `S` additionally needs the
    /// vacuum constraint `div E = 0`.
    pub fn potential_representation(&self, state: &FieldState) -> Result<PotentialState> {
        let a = self.inverse_curl(&state.b)?;
        let y = self.curl(&state.e).scaled(-1.0);
        let s = self.inverse_curl(&state.e.scaled(-1.0))?;
        Ok(PotentialState { a, y, s })
    }

    /// Energy expressed through the potentials:
    /// `((rot^-1 Y, rot^-1 Y) + (rot A, rot A)) / 2`.
    pub fn energy_from_potentials(&self, pstate: &PotentialState) -> Result<f64> {
        let inv_y = self.inverse_curl(&pstate.y)?;
        let rot_a = self.curl(&pstate.a);
        Ok(0.5 * (inv_y.inner(&inv_y) + rot_a.inner(&rot_a)))
    }

    /// Helicity Hamiltonian expressed through the potentials:
    /// `((rot^3 A, A) + (rot^-1 Y, Y)) / 2`.
    pub fn helicity_from_potentials(&self, pstate: &PotentialState) -> Result<f64> {
        let rot3_a = self.curl(&self.curl(&self.curl(&pstate.a)));
        let inv_y = self.inverse_curl(&pstate.y)?;
        Ok(0.5 * (rot3_a.inner(&pstate.a) + inv_y.inner(&pstate.y)))
    }
}

/// Momentum map values and constraint residuals for a field state.
#[derive(Debug, Clone)]
pub struct MomentumMapReport {
    /// `div E`, the electric component of the momentum map.
    pub l_e: ScalarField,
    /// `-div B`, the magnetic component.
    pub l_b: ScalarField,
    /// `|| div E - rho ||_2` (vacuum: `rho = 0`).
    pub res_div_e: f64,
    /// `|| div B ||_2`.
    pub res_div_b: f64,
}

#[inline]
pub(crate) fn i_times(v: Complex64) -> Complex64 {
    Complex64::new(-v.im, v.re)
}

#[inline]
pub(crate) fn cross_real_complex(k: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    [
        v[2] * k[1] - v[1] * k[2],
        v[0] * k[2] - v[2] * k[0],
        v[1] * k[0] - v[0] * k[1],
    ]
}
