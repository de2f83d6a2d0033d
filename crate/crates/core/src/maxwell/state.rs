//! Field states on the periodic grid and their standard constructors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{Error, Result};

use super::grid::{GridSpec, ScalarField, VectorField};
use super::spectral::Spectral;

/// Electric and magnetic fields sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub e: VectorField,
    pub b: VectorField,
}

impl FieldState {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            e: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.e.grid()
    }

    /// Transverse plane wave along x at time `t`:
    /// `E_y = B_z = cos(k (x - t))` with the fundamental wavenumber
    /// `k = 2 pi / l`. An exact vacuum solution with period `l`.
    pub fn plane_wave_at(grid: GridSpec, t: f64) -> Self {
        let k = 2.0 * std::f64::consts::PI / grid.l();
        Self {
            e: VectorField::from_fn(grid, |x, _, _| [0.0, (k * (x - t)).cos(), 0.0]),
            b: VectorField::from_fn(grid, |x, _, _| [0.0, 0.0, (k * (x - t)).cos()]),
        }
    }

    pub fn plane_wave(grid: GridSpec) -> Self {
        Self::plane_wave_at(grid, 0.0)
    }

    /// Seeded random band-limited state projected onto the mean-free
    /// solenoidal subspace (both constraints hold to rounding).
    pub fn random_solenoidal(spectral: &Spectral, seed: u64, max_wavenumber: usize) -> Self {
        let grid = spectral.grid();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let trig_field = |rng: &mut ChaCha20Rng| {
            let base = 2.0 * std::f64::consts::PI / grid.l();
            let modes: Vec<([f64; 3], f64, f64)> = (0..6)
                .map(|_| {
                    let k = max_wavenumber as i64;
                    let mut wave = [0i64; 3];
                    while wave == [0; 3] {
                        for w in wave.iter_mut() {
                            *w = rng.gen_range(-k..=k);
                        }
                    }
                    (
                        [
                            base * wave[0] as f64,
                            base * wave[1] as f64,
                            base * wave[2] as f64,
                        ],
                        rng.gen_range(-0.5..0.5),
                        rng.gen_range(-0.5..0.5),
                    )
                })
                .collect();
            VectorField::from_fn(grid, move |x, y, z| {
                let mut v = [0.0; 3];
                for (c, vc) in v.iter_mut().enumerate() {
                    for (i, (kv, ca, sa)) in modes.iter().enumerate() {
                        // Stagger modes across components.
                        if i % 3 == c {
                            let phase = kv[0] * x + kv[1] * y + kv[2] * z;
                            *vc += ca * phase.cos() + sa * phase.sin();
                        }
                    }
                }
                v
            })
        };
        let e = spectral.project_solenoidal(&trig_field(&mut rng));
        let b = spectral.project_solenoidal(&trig_field(&mut rng));
        Self { e, b }
    }

    /// Total field energy `((E, E) + (B, B)) / 2` by grid quadrature.
    pub fn energy(&self) -> f64 {
        0.5 * (self.e.norm_sq() + self.b.norm_sq())
    }

    pub fn linf_diff(&self, other: &FieldState) -> f64 {
        self.e.linf_diff(&other.e).max(self.b.linf_diff(&other.b))
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.b.is_finite()
    }
}

/// Potential representation `(A, Y, S)`: `curl A = B`, `Y = -curl E`,
/// `curl S = -E`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    pub a: VectorField,
    pub y: VectorField,
    pub s: VectorField,
}

/// Static charge density on the torus; must be mean-free for the constraint
/// `div E = rho` to be solvable.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeDensity {
    pub rho: ScalarField,
}

impl ChargeDensity {
    pub fn new(rho: ScalarField) -> Result<Self> {
        let mean = rho.mean().abs();
        if mean > 1e-10 {
            return Err(Error::Grid(format!(
                "charge density must be mean-free on the torus (mean {mean:e})"
            )));
        }
        Ok(Self { rho })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self> {
        Self::new(ScalarField::from_fn(grid, f))
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self {
            rho: ScalarField::zeros(grid),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> GridSpec {
        GridSpec::new(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        assert_eq!(FieldState::zero(grid()).energy(), 0.0);
    }

    #[test]
    fn plane_wave_energy_is_half_volume() {
        // E and B each contribute V/4 from the cos^2 integral.
        let g = grid();
        let s = FieldState::plane_wave(g);
        assert_abs_diff_eq!(s.energy(), 0.5 * g.volume(), epsilon = 1e-9);
    }

    #[test]
    fn random_solenoidal_satisfies_constraints() {
        let g = grid();
        let sp = Spectral::new(g);
        let s = FieldState::random_solenoidal(&sp, 7, 3);
        assert!(sp.div(&s.e).linf_norm() < 1e-12);
        assert!(sp.div(&s.b).linf_norm() < 1e-12);
        assert!(s.e.linf_norm() > 1e-3, "state should be nontrivial");
    }

    #[test]
    fn charge_density_must_be_mean_free() {
        let g = grid();
        assert!(ChargeDensity::from_fn(g, |x, _, _| x.sin()).is_ok());
        assert!(ChargeDensity::from_fn(g, |_, _, _| 1.0).is_err());
    }
}
