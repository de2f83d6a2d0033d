//! Periodic grid containers. Layout is x-fastest: flat index
//! `(iz * n + iy) * n + ix`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cubic periodic grid: `n` points per axis over a torus of edge `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    l: f64,
}

impl GridSpec {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "grid points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(l > 0.0) {
            return Err(Error::Grid(format!("box length must be positive, got {l}")));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn cell_volume(&self) -> f64 {
        (self.l / self.n as f64).powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.l.powi(3)
    }

    /// Physical coordinate of grid index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.l * i as f64 / self.n as f64
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.n + iy) * self.n + ix
    }
}

/// Scalar samples on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.points()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.points());
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    data.push(f(grid.coord(ix), grid.coord(iy), grid.coord(iz)));
                }
            }
        }
        Self { grid, data }
    }

    pub fn from_data(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.points() {
            return Err(Error::Shape {
                expected: grid.points(),
                got: data.len(),
                context: "scalar field samples",
            });
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Discrete L2 norm `sqrt(sum f^2 dV)`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Grid quadrature of `self * other`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }
}

/// Three-component vector samples on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            comps: [(); 3].map(|_| vec![0.0; grid.points()]),
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let n = grid.n();
        let mut out = Self::zeros(grid);
        for iz in 0..n {
            for iy in 0..n {
                for ix in 0..n {
                    let v = f(grid.coord(ix), grid.coord(iy), grid.coord(iz));
                    let idx = grid.index(ix, iy, iz);
                    for c in 0..3 {
                        out.comps[c][idx] = v[c];
                    }
                }
            }
        }
        out
    }

    pub fn from_components(grid: GridSpec, comps: [Vec<f64>; 3]) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.points() {
                return Err(Error::Shape {
                    expected: grid.points(),
                    got: c.len(),
                    context: "vector field samples",
                });
            }
        }
        Ok(Self { grid, comps })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut Vec<f64> {
        &mut self.comps[c]
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Grid quadrature of the componentwise inner product `(self, other)`.
    pub fn inner(&self, other: &VectorField) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            acc += self.comps[c]
                .iter()
                .zip(other.comps[c].iter())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        acc * self.grid.cell_volume()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn linf_norm(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn linf_diff(&self, other: &VectorField) -> f64 {
        let mut m = 0.0f64;
        for c in 0..3 {
            for (a, b) in self.comps[c].iter().zip(other.comps[c].iter()) {
                m = m.max((a - b).abs());
            }
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> VectorField {
        let mut out = self.clone();
        for c in 0..3 {
            for v in out.comps[c].iter_mut() {
                *v *= factor;
            }
        }
        out
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        for c in 0..3 {
            for (v, w) in out.comps[c].iter_mut().zip(other.comps[c].iter()) {
                *v += w;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(8, 1.0).is_ok());
        assert!(GridSpec::new(6, 1.0).is_err());
        assert!(GridSpec::new(4, 1.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
    }

    #[test]
    fn index_is_x_fastest() {
        let g = GridSpec::new(8, 1.0).unwrap();
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 8);
        assert_eq!(g.index(0, 0, 1), 64);
    }

    #[test]
    fn quadrature_of_cosine_squared() {
        let g = GridSpec::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| x.cos());
        // Trapezoid-exact for band-limited integrands: integral of cos^2 over
        // the torus is V/2.
        let v = g.volume();
        assert!((f.inner(&f) - v / 2.0).abs() < 1e-10);
    }
}
