//! Finite-dimensional Lie algebra arithmetic on explicit structure constants.
//!
//! An algebra is given by the rank-3 array `c^r_{sk}` with
//! `[a, b]^r = Σ_{s,k} c^r_{sk} a^s b^k`. The module validates the algebra
//! axioms, evaluates brackets, and computes the coadjoint invariance residual
//! `r_{sk}(ξ) = Σ_r c^r_{sk} e_r` that gates the reduction layer: a dual
//! element is usable for reduction exactly when the residual vanishes.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance below which axiom residuals count as zero. Structure
/// constants are exact rationals in practice, so this is a rounding floor.
pub const AXIOM_TOLERANCE: f64 = 1e-12;

/// Structure constants `c^r_{sk}` of an `n`-dimensional Lie algebra. The
/// upper index is the result component.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    /// Flat storage, index `(r * n + s) * n + k`.
    c: Vec<f64>,
}

/// Element of the dual algebra, expanded over the bi-orthogonal basis:
/// `ξ = Σ_s e_s a^s` with `<a^s, a_k> = δ^s_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualElement {
    components: Vec<f64>,
}

/// One axiom violation found by [`StructureConstants::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub indices: Vec<usize>,
    pub residual: f64,
}

/// Validation report: empty violation lists mean the constants define a Lie
/// algebra to [`AXIOM_TOLERANCE`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub antisymmetry: Vec<Violation>,
    pub jacobi: Vec<Violation>,
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry.is_empty() && self.jacobi.is_empty()
    }
}

impl StructureConstants {
    /// Build from raw flat coefficients without validation. Intended for
    /// tests and config paths that deliberately construct invalid data.
    pub fn from_raw(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Shape {
                expected: dim * dim * dim,
                got: c.len(),
                context: "structure constants",
            });
        }
        Ok(Self { dim, c })
    }

    /// Build from sparse triples `(r, s, k, value)` with implied antisymmetric
    /// completion: each entry also sets `c^r_{ks} = -value`.
    pub fn from_triples(dim: usize, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut sc = Self {
            dim,
            c: vec![0.0; dim * dim * dim],
        };
        for &(r, s, k, value) in triples {
            if r >= dim || s >= dim || k >= dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: r.max(s).max(k) + 1,
                    context: "structure constant index",
                });
            }
            sc.set(r, s, k, value);
            sc.set(r, k, s, -value);
        }
        Ok(sc)
    }

    /// Abelian algebra of dimension `n`: all constants vanish.
    pub fn abelian(n: usize) -> Self {
        Self {
            dim: n,
            c: vec![0.0; n * n * n],
        }
    }

    /// so(3): `c^r_{sk} = ε_{skr}`, i.e. `[e_1, e_2] = e_3` and cyclic.
    pub fn so3() -> Self {
        Self::from_triples(3, &[(2, 0, 1, 1.0), (0, 1, 2, 1.0), (1, 2, 0, 1.0)])
            .expect("so(3) preset")
    }

    /// Heisenberg algebra on three generators: `[e_1, e_2] = e_3`, center e_3.
    pub fn heisenberg() -> Self {
        Self::from_triples(3, &[(2, 0, 1, 1.0)]).expect("heisenberg preset")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize, k: usize) -> f64 {
        self.c[(r * self.dim + s) * self.dim + k]
    }

    fn set(&mut self, r: usize, s: usize, k: usize, value: f64) {
        self.c[(r * self.dim + s) * self.dim + k] = value;
    }

    /// True when every constant vanishes.
    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|&v| v == 0.0)
    }

    /// Structural equality with the so(3) preset.
    pub fn is_so3(&self) -> bool {
        self.dim == 3 && *self == Self::so3()
    }

    /// Check antisymmetry and the Jacobi identity on the constants by direct
    /// summation, reporting every violation above [`AXIOM_TOLERANCE`].
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut report = ValidationReport::default();
        for r in 0..n {
            for s in 0..n {
                for k in 0..n {
                    let res = self.get(r, s, k) + self.get(r, k, s);
                    report.max_residual = report.max_residual.max(res.abs());
                    if res.abs() > AXIOM_TOLERANCE {
                        report.antisymmetry.push(Violation {
                            indices: vec![r, s, k],
                            residual: res,
                        });
                    }
                }
            }
        }
        for r in 0..n {
            for s in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut res = 0.0;
                        for m in 0..n {
                            res += self.get(m, s, k) * self.get(r, m, l)
                                + self.get(m, k, l) * self.get(r, m, s)
                                + self.get(m, l, s) * self.get(r, m, k);
                        }
                        report.max_residual = report.max_residual.max(res.abs());
                        if res.abs() > AXIOM_TOLERANCE {
                            report.jacobi.push(Violation {
                                indices: vec![r, s, k, l],
                                residual: res,
                            });
                        }
                    }
                }
            }
        }
        report
    }

    /// Algebra bracket `[a, b]^r = Σ c^r_{sk} a^s b^k`.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if a.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: a.len(),
                context: "bracket lhs",
            });
        }
        if b.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: b.len(),
                context: "bracket rhs",
            });
        }
        let mut out = vec![0.0; n];
        for r in 0..n {
            let mut acc = 0.0;
            for s in 0..n {
                for k in 0..n {
                    acc += self.get(r, s, k) * a[s] * b[k];
                }
            }
            out[r] = acc;
        }
        Ok(out)
    }

    /// Coadjoint invariance residual `r_{sk} = Σ_r c^r_{sk} e_r`. The dual
    /// element is invariant (and usable for reduction) iff this vanishes.
    pub fn invariance_residual(&self, xi: &DualElement) -> Result<DMatrix<f64>> {
        let n = self.dim;
        if xi.dim() != n {
            return Err(Error::Shape {
                expected: n,
                got: xi.dim(),
                context: "dual element",
            });
        }
        let mut out = DMatrix::zeros(n, n);
        for s in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += self.get(r, s, k) * xi.component(r);
                }
                out[(s, k)] = acc;
            }
        }
        Ok(out)
    }

    /// Enforce the invariance gate: error naming the first offending `(s, k)`
    /// pair when the residual exceeds `tolerance`.
    pub fn check_invariance(&self, xi: &DualElement, tolerance: f64) -> Result<()> {
        let res = self.invariance_residual(xi)?;
        for s in 0..self.dim {
            for k in 0..self.dim {
                if res[(s, k)].abs() > tolerance {
                    return Err(Error::Invariance {
                        s,
                        k,
                        value: res[(s, k)],
                        tolerance,
                    });
                }
            }
        }
        Ok(())
    }
}

impl DualElement {
    pub fn new(components: Vec<f64>) -> Self {
        Self { components }
    }

    /// Seeded batch of dual elements with components uniform in [-2, 2];
    /// used by gate scans.
    pub fn sample_batch(n: usize, count: usize, seed: u64) -> Vec<Self> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| Self::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()))
            .collect()
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            components: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn component(&self, i: usize) -> f64 {
        self.components[i]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            components: self.components.iter().map(|e| factor * e).collect(),
        }
    }

    pub fn as_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.components)
    }
}
