//! Gauge potentials over a spatial box and their curvature tensors.
//!
//! Potentials are componentwise closed-form fields (polynomial or
//! trigonometric), so analytic derivatives are always available; a
//! finite-difference mode with the shared 4th-order stencil exists both as a
//! fallback and as a cross-check on the analytic path.
//!
//! Conventions. The curvature of a potential `A^(s)_j` is
//!
//! ```text
//! F^(s)_ij = d_i A^(s)_j - d_j A^(s)_i + sum_{k,r} c^s_{kr} A^(k)_i A^(r)_j
//! ```
//!
//! and the field-equation (Bianchi) residual implemented here is the cyclic
//! covariant derivative of that curvature,
//!
//! ```text
//! R^(s)_ijl = d_l F_ij + d_i F_jl + d_j F_li
//!           + sum_{k,r} c^s_{kr} (A^(k)_i F^(r)_jl + A^(k)_j F^(r)_li + A^(k)_l F^(r)_ij),
//! ```
//!
//! which vanishes identically when `F` is derived from a potential and is the
//! discriminating statistic for free-standing curvature data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::lie_algebra::StructureConstants;
use crate::{Error, Result};

/// Default step for the shared 4th-order central difference stencil.
pub const FD_STEP: f64 = 1e-4;

/// 4th-order central first derivative.
pub(crate) fn central4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h)
}

/// Axis-aligned spatial box; potentials and curvatures are sampled inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            min: [-1.0; 3],
            max: [1.0; 3],
        }
    }
}

impl Domain {
    /// Symmetric box `[-half_width, half_width]^3`.
    pub fn symmetric(half_width: f64) -> Self {
        Self {
            min: [-half_width; 3],
            max: [half_width; 3],
        }
    }

    pub fn contains(&self, q: &[f64; 3]) -> bool {
        (0..3).all(|i| q[i] >= self.min[i] && q[i] <= self.max[i])
    }

    pub fn check(&self, q: &[f64; 3]) -> Result<()> {
        if self.contains(q) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(q[0], q[1], q[2]))
        }
    }

    /// Deterministic uniform sample points.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let mut q = [0.0; 3];
                for (i, qi) in q.iter_mut().enumerate() {
                    *qi = rng.gen_range(self.min[i]..self.max[i]);
                }
                q
            })
            .collect()
    }
}

/// `coeff * q1^p1 q2^p2 q3^p3`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub powers: [u32; 3],
    pub coeff: f64,
}

/// `cos_amp * cos(pi k.q) + sin_amp * sin(pi k.q)` with integer wavevector
/// `k`; periodic on the default box `[-1, 1]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub wave: [i32; 3],
    pub cos_amp: f64,
    pub sin_amp: f64,
}

/// Closed-form scalar field over the domain: a sum of monomials and
/// trigonometric modes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldExpr {
    #[serde(default)]
    pub monomials: Vec<Monomial>,
    #[serde(default)]
    pub trig: Vec<TrigMode>,
}

impl FieldExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            monomials: vec![Monomial {
                powers: [0, 0, 0],
                coeff: value,
            }],
            trig: Vec::new(),
        }
    }

    /// `coeff * q_axis`
    pub fn linear(axis: usize, coeff: f64) -> Self {
        let mut powers = [0u32; 3];
        powers[axis] = 1;
        Self {
            monomials: vec![Monomial { powers, coeff }],
            trig: Vec::new(),
        }
    }

    pub fn from_monomials(monomials: Vec<Monomial>) -> Self {
        Self {
            monomials,
            trig: Vec::new(),
        }
    }

    pub fn from_trig(trig: Vec<TrigMode>) -> Self {
        Self {
            monomials: Vec::new(),
            trig,
        }
    }

    pub fn add(&mut self, other: FieldExpr) {
        self.monomials.extend(other.monomials);
        self.trig.extend(other.trig);
    }

    pub fn value(&self, q: &[f64; 3]) -> f64 {
        let poly: f64 = self
            .monomials
            .iter()
            .map(|m| {
                m.coeff
                    * q.iter()
                        .zip(m.powers.iter())
                        .map(|(qi, &p)| qi.powi(p as i32))
                        .product::<f64>()
            })
            .sum();
        let osc: f64 = self
            .trig
            .iter()
            .map(|m| {
                let phase = std::f64::consts::PI
                    * (m.wave[0] as f64 * q[0] + m.wave[1] as f64 * q[1] + m.wave[2] as f64 * q[2]);
                m.cos_amp * phase.cos() + m.sin_amp * phase.sin()
            })
            .sum();
        poly + osc
    }

    /// Analytic partial derivative along `axis`, evaluated at `q`.
    pub fn grad(&self, axis: usize, q: &[f64; 3]) -> f64 {
        let poly: f64 = self
            .monomials
            .iter()
            .filter(|m| m.powers[axis] > 0)
            .map(|m| {
                let mut v = m.coeff * m.powers[axis] as f64;
                for i in 0..3 {
                    let p = if i == axis {
                        m.powers[i] - 1
                    } else {
                        m.powers[i]
                    };
                    v *= q[i].powi(p as i32);
                }
                v
            })
            .sum();
        let osc: f64 = self
            .trig
            .iter()
            .map(|m| {
                let kpi = std::f64::consts::PI * m.wave[axis] as f64;
                let phase = std::f64::consts::PI
                    * (m.wave[0] as f64 * q[0] + m.wave[1] as f64 * q[1] + m.wave[2] as f64 * q[2]);
                kpi * (m.sin_amp * phase.cos() - m.cos_amp * phase.sin())
            })
            .sum();
        poly + osc
    }

    /// Exact symbolic derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> FieldExpr {
        FieldExpr {
            monomials: self
                .monomials
                .iter()
                .filter(|m| m.powers[axis] > 0)
                .map(|m| {
                    let mut powers = m.powers;
                    powers[axis] -= 1;
                    Monomial {
                        powers,
                        coeff: m.coeff * m.powers[axis] as f64,
                    }
                })
                .collect(),
            trig: self
                .trig
                .iter()
                .map(|m| {
                    let kpi = std::f64::consts::PI * m.wave[axis] as f64;
                    TrigMode {
                        wave: m.wave,
                        cos_amp: kpi * m.sin_amp,
                        sin_amp: -kpi * m.cos_amp,
                    }
                })
                .collect(),
        }
    }
}

/// Which derivative path [`GaugePotential::jacobian`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference { step: f64 },
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::FiniteDifference { step: FD_STEP }
    }
}

/// Options for the seeded random trigonometric potential preset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RandomTrigOptions {
    pub modes_per_component: usize,
    pub max_wavenumber: i32,
    pub amplitude: f64,
}

impl Default for RandomTrigOptions {
    fn default() -> Self {
        Self {
            modes_per_component: 4,
            max_wavenumber: 3,
            amplitude: 0.5,
        }
    }
}

/// Gauge potential `A^(s)_j(q)`, `s = 1..n`, `j = 1..3`. `n = 1` with the
/// abelian algebra is the electromagnetic case.
#[derive(Debug, Clone)]
pub struct GaugePotential {
    algebra: StructureConstants,
    /// `comps[s][j]` evaluates `A^(s)_j`.
    comps: Vec<[FieldExpr; 3]>,
    domain: Domain,
    derivative_mode: DerivativeMode,
}

impl GaugePotential {
    pub fn new(
        algebra: StructureConstants,
        comps: Vec<[FieldExpr; 3]>,
        domain: Domain,
        derivative_mode: DerivativeMode,
    ) -> Result<Self> {
        if comps.len() != algebra.dim() {
            return Err(Error::Shape {
                expected: algebra.dim(),
                got: comps.len(),
                context: "potential components",
            });
        }
        Ok(Self {
            algebra,
            comps,
            domain,
            derivative_mode,
        })
    }

    /// Abelian `A = (0, b q^1, 0)`: uniform magnetic component `F_12 = b`.
    /// Polynomial presets carry an enlarged box so particle orbits can roam.
    pub fn uniform_b(b: f64) -> Self {
        Self::new(
            StructureConstants::abelian(1),
            vec![[
                FieldExpr::zero(),
                FieldExpr::linear(0, b),
                FieldExpr::zero(),
            ]],
            Domain::symmetric(8.0),
            DerivativeMode::Analytic,
        )
        .expect("uniform-b preset")
    }

    /// Abelian linear potential `A_j = sum_m coeffs[j][m] q^m` (constant
    /// curvature `F_ij = coeffs[j][i] - coeffs[i][j]`).
    pub fn linear_abelian(coeffs: [[f64; 3]; 3]) -> Self {
        let comps = [0, 1, 2].map(|j| {
            FieldExpr::from_monomials(
                (0..3)
                    .filter(|&m| coeffs[j][m] != 0.0)
                    .map(|m| {
                        let mut powers = [0u32; 3];
                        powers[m] = 1;
                        Monomial {
                            powers,
                            coeff: coeffs[j][m],
                        }
                    })
                    .collect(),
            )
        });
        Self::new(
            StructureConstants::abelian(1),
            vec![comps],
            Domain::symmetric(8.0),
            DerivativeMode::Analytic,
        )
        .expect("linear preset")
    }

    /// so(3) constant potential `A^(k)_i = a d^k_i`; curvature is the pure
    /// commutator term `a^2 c^s_{ij}`.
    pub fn so3_constant(a: f64) -> Self {
        let comps = (0..3)
            .map(|s| {
                let mut row = [FieldExpr::zero(), FieldExpr::zero(), FieldExpr::zero()];
                row[s] = FieldExpr::constant(a);
                row
            })
            .collect();
        Self::new(
            StructureConstants::so3(),
            comps,
            Domain::symmetric(8.0),
            DerivativeMode::Analytic,
        )
        .expect("so3-constant preset")
    }

    /// Seeded random trigonometric potential: every component is a trig
    /// polynomial with integer wavevectors bounded by `max_wavenumber` and
    /// coefficients drawn uniformly, scaled by `amplitude / modes`.
    pub fn random_trig(algebra: StructureConstants, seed: u64, opts: RandomTrigOptions) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let scale = opts.amplitude / opts.modes_per_component.max(1) as f64;
        let k = opts.max_wavenumber;
        let comps = (0..algebra.dim())
            .map(|_| {
                [0, 1, 2].map(|_| {
                    let modes = (0..opts.modes_per_component)
                        .map(|_| {
                            let mut wave = [0i32; 3];
                            while wave == [0; 3] {
                                for w in wave.iter_mut() {
                                    *w = rng.gen_range(-k..=k);
                                }
                            }
                            TrigMode {
                                wave,
                                cos_amp: scale * rng.gen_range(-1.0..1.0),
                                sin_amp: scale * rng.gen_range(-1.0..1.0),
                            }
                        })
                        .collect();
                    FieldExpr::from_trig(modes)
                })
            })
            .collect();
        Self::new(algebra, comps, Domain::default(), DerivativeMode::Analytic)
            .expect("random-trig preset")
    }

    pub fn zero(algebra: StructureConstants) -> Self {
        let comps = (0..algebra.dim())
            .map(|_| [FieldExpr::zero(), FieldExpr::zero(), FieldExpr::zero()])
            .collect();
        Self::new(algebra, comps, Domain::default(), DerivativeMode::Analytic).expect("zero")
    }

    pub fn algebra(&self) -> &StructureConstants {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative_mode
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = mode;
        self
    }

    pub fn component(&self, s: usize, j: usize) -> &FieldExpr {
        &self.comps[s][j]
    }

    /// `A^(s)_j(q)` for all components.
    pub fn value(&self, q: &[f64; 3]) -> Result<Vec<[f64; 3]>> {
        self.domain.check(q)?;
        Ok(self
            .comps
            .iter()
            .map(|row| [0, 1, 2].map(|j| row[j].value(q)))
            .collect())
    }

    /// `jacobian[s][j][m] = d A^(s)_j / d q^m`, via the configured mode.
    pub fn jacobian(&self, q: &[f64; 3]) -> Result<Vec<[[f64; 3]; 3]>> {
        self.domain.check(q)?;
        Ok(self
            .comps
            .iter()
            .map(|row| {
                [0, 1, 2].map(|j| {
                    [0, 1, 2].map(|m| match self.derivative_mode {
                        DerivativeMode::Analytic => row[j].grad(m, q),
                        DerivativeMode::FiniteDifference { step } => central4(
                            |x| {
                                let mut qq = *q;
                                qq[m] = x;
                                row[j].value(&qq)
                            },
                            q[m],
                            step,
                        ),
                    })
                })
            })
            .collect())
    }

    /// Max deviation between analytic and finite-difference jacobians over
    /// the samples; the self-consistency check on supplied derivatives.
    pub fn derivative_consistency(&self, samples: &[[f64; 3]]) -> Result<f64> {
        let analytic = self.clone().with_derivative_mode(DerivativeMode::Analytic);
        let fd = self
            .clone()
            .with_derivative_mode(DerivativeMode::FiniteDifference { step: FD_STEP });
        let mut worst = 0.0f64;
        for q in samples {
            let ja = analytic.jacobian(q)?;
            let jf = fd.jacobian(q)?;
            for s in 0..self.dim() {
                for j in 0..3 {
                    for m in 0..3 {
                        worst = worst.max((ja[s][j][m] - jf[s][j][m]).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Abelian gauge transformation `A -> A + grad psi`.
    pub fn plus_gradient(&self, psi: &FieldExpr) -> Result<Self> {
        if !self.algebra.is_abelian() {
            return Err(Error::BracketConfig(
                "gradient gauge shift is an abelian operation".into(),
            ));
        }
        let mut out = self.clone();
        for row in out.comps.iter_mut() {
            for (j, comp) in row.iter_mut().enumerate() {
                comp.add(psi.derivative(j));
            }
        }
        Ok(out)
    }

    /// `curvature[s][i][j] = F^(s)_ij(q)`; antisymmetric in `(i, j)` exactly.
    pub fn curvature(&self, q: &[f64; 3]) -> Result<Vec<[[f64; 3]; 3]>> {
        let jac = self.jacobian(q)?;
        let a = self.value(q)?;
        let n = self.dim();
        let sc = &self.algebra;
        let mut f = vec![[[0.0; 3]; 3]; n];
        for s in 0..n {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let mut v = jac[s][j][i] - jac[s][i][j];
                    if !sc.is_abelian() {
                        for k in 0..n {
                            for r in 0..n {
                                let c = sc.get(s, k, r);
                                if c != 0.0 {
                                    v += c * a[k][i] * a[r][j];
                                }
                            }
                        }
                    }
                    f[s][i][j] = v;
                    f[s][j][i] = -v;
                }
            }
        }
        Ok(f)
    }
}

/// Curvature data `F^(s)_ij(q)`: derived from a potential, free-standing, or
/// a perturbation of either. Free-standing inputs are what make the
/// field-equation criteria falsifiable.
#[derive(Debug, Clone)]
pub enum CurvatureField {
    Derived(GaugePotential),
    FreeStanding {
        algebra: StructureConstants,
        domain: Domain,
        /// `comps[s] = [F_12, F_13, F_23]` expressions.
        comps: Vec<[FieldExpr; 3]>,
    },
    Perturbed {
        base: Box<CurvatureField>,
        s: usize,
        i: usize,
        j: usize,
        delta: FieldExpr,
    },
}

impl CurvatureField {
    pub fn derived(pot: GaugePotential) -> Self {
        CurvatureField::Derived(pot)
    }

    pub fn free_standing(
        algebra: StructureConstants,
        comps: Vec<[FieldExpr; 3]>,
    ) -> Result<Self> {
        if comps.len() != algebra.dim() {
            return Err(Error::Shape {
                expected: algebra.dim(),
                got: comps.len(),
                context: "curvature components",
            });
        }
        Ok(CurvatureField::FreeStanding {
            algebra,
            domain: Domain::default(),
            comps,
        })
    }

    /// Abelian free-standing curvature with a single `F_12` component.
    pub fn abelian_f12(expr: FieldExpr) -> Self {
        Self::free_standing(
            StructureConstants::abelian(1),
            vec![[expr, FieldExpr::zero(), FieldExpr::zero()]],
        )
        .expect("abelian curvature")
    }

    /// Add `delta(q)` to component `F^(s)_ij` (and `-delta` to `F^(s)_ji`).
    pub fn perturbed(self, s: usize, i: usize, j: usize, delta: FieldExpr) -> Self {
        CurvatureField::Perturbed {
            base: Box::new(self),
            s,
            i,
            j,
            delta,
        }
    }

    pub fn algebra(&self) -> &StructureConstants {
        match self {
            CurvatureField::Derived(pot) => pot.algebra(),
            CurvatureField::FreeStanding { algebra, .. } => algebra,
            CurvatureField::Perturbed { base, .. } => base.algebra(),
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra().dim()
    }

    pub fn domain(&self) -> &Domain {
        match self {
            CurvatureField::Derived(pot) => pot.domain(),
            CurvatureField::FreeStanding { domain, .. } => domain,
            CurvatureField::Perturbed { base, .. } => base.domain(),
        }
    }

    /// True when the data is the exact curvature of a stored potential.
    pub fn is_derived(&self) -> bool {
        matches!(self, CurvatureField::Derived(_))
    }

    pub fn potential(&self) -> Option<&GaugePotential> {
        match self {
            CurvatureField::Derived(pot) => Some(pot),
            CurvatureField::FreeStanding { .. } => None,
            CurvatureField::Perturbed { base, .. } => base.potential(),
        }
    }

    /// `eval[s][i][j] = F^(s)_ij(q)`, antisymmetric exactly.
    pub fn eval(&self, q: &[f64; 3]) -> Result<Vec<[[f64; 3]; 3]>> {
        match self {
            CurvatureField::Derived(pot) => pot.curvature(q),
            CurvatureField::FreeStanding {
                domain,
                comps,
                algebra,
            } => {
                domain.check(q)?;
                let mut out = vec![[[0.0; 3]; 3]; algebra.dim()];
                for (s, row) in comps.iter().enumerate() {
                    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
                    for (c, &(i, j)) in pairs.iter().enumerate() {
                        let v = row[c].value(q);
                        out[s][i][j] = v;
                        out[s][j][i] = -v;
                    }
                }
                Ok(out)
            }
            CurvatureField::Perturbed {
                base,
                s,
                i,
                j,
                delta,
            } => {
                let mut out = base.eval(q)?;
                let v = delta.value(q);
                out[*s][*i][*j] += v;
                out[*s][*j][*i] -= v;
                Ok(out)
            }
        }
    }

    /// Field-equation residual `R^(s)_ijl` at `q` (see module docs). The
    /// nonabelian quadratic terms need the potential: pass it explicitly or
    /// rely on the one stored in a derived curvature.
    pub fn bianchi_residual(
        &self,
        pot: Option<&GaugePotential>,
        q: &[f64; 3],
    ) -> Result<Vec<[[[f64; 3]; 3]; 3]>> {
        self.domain().check(q)?;
        let n = self.dim();
        let sc = self.algebra().clone();
        let abelian = sc.is_abelian();
        let pot = match (pot, abelian) {
            (Some(p), _) => Some(p),
            (None, true) => None,
            (None, false) => Some(self.potential().ok_or(Error::MissingPotential)?),
        };

        // dF[m][s][i][j] = d_m F^(s)_ij, 4th-order central differences with
        // the shared stencil.
        let mut df = [const { Vec::new() }; 3];
        for (m, slot) in df.iter_mut().enumerate() {
            let h = FD_STEP;
            let eval_shift = |x: f64| -> Result<Vec<[[f64; 3]; 3]>> {
                let mut qq = *q;
                qq[m] = x;
                self.eval(&qq)
            };
            let fp = eval_shift(q[m] + h)?;
            let fm = eval_shift(q[m] - h)?;
            let fp2 = eval_shift(q[m] + 2.0 * h)?;
            let fm2 = eval_shift(q[m] - 2.0 * h)?;
            let mut d = vec![[[0.0; 3]; 3]; n];
            for s in 0..n {
                for i in 0..3 {
                    for j in 0..3 {
                        d[s][i][j] = (8.0 * (fp[s][i][j] - fm[s][i][j])
                            - (fp2[s][i][j] - fm2[s][i][j]))
                            / (12.0 * h);
                    }
                }
            }
            *slot = d;
        }

        let f = self.eval(q)?;
        let a = match pot {
            Some(p) => Some(p.value(q)?),
            None => None,
        };

        let mut out = vec![[[[0.0; 3]; 3]; 3]; n];
        for s in 0..n {
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        let mut v = df[l][s][i][j] + df[i][s][j][l] + df[j][s][l][i];
                        if !abelian {
                            let a = a.as_ref().expect("potential checked above");
                            for k in 0..n {
                                for r in 0..n {
                                    let c = sc.get(s, k, r);
                                    if c != 0.0 {
                                        v += c
                                            * (a[k][i] * f[r][j][l]
                                                + a[k][j] * f[r][l][i]
                                                + a[k][l] * f[r][i][j]);
                                    }
                                }
                            }
                        }
                        out[s][i][j][l] = v;
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const SAMPLES: usize = 12;

    #[test]
    fn uniform_b_curvature_hand_oracle() {
        // A = (0, b q1, 0): dA_2/dq1 = b, every other derivative zero.
        let pot = GaugePotential::uniform_b(0.75);
        let f = pot.curvature(&[0.3, -0.2, 0.9]).unwrap();
        assert_abs_diff_eq!(f[0][0][1], 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(f[0][1][0], -0.75, epsilon = 1e-14);
        assert_eq!(f[0][0][2], 0.0);
        assert_eq!(f[0][1][2], 0.0);
    }

    #[test]
    fn gradient_potential_has_zero_curvature() {
        // A = grad psi with psi = q1^2 q3 + 2 q2.
        let psi = FieldExpr::from_monomials(vec![
            Monomial {
                powers: [2, 0, 1],
                coeff: 1.0,
            },
            Monomial {
                powers: [0, 1, 0],
                coeff: 2.0,
            },
        ]);
        let comps = vec![[psi.derivative(0), psi.derivative(1), psi.derivative(2)]];
        let pot = GaugePotential::new(
            StructureConstants::abelian(1),
            comps,
            Domain::default(),
            DerivativeMode::Analytic,
        )
        .unwrap();
        for q in Domain::default().sample_points(SAMPLES, 7) {
            let f = pot.curvature(&q).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(f[0][i][j], 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn abelian_gauge_invariance_of_curvature() {
        let pot = GaugePotential::random_trig(
            StructureConstants::abelian(1),
            11,
            RandomTrigOptions::default(),
        );
        let psi = FieldExpr::from_trig(vec![TrigMode {
            wave: [1, -2, 0],
            cos_amp: 0.4,
            sin_amp: -0.3,
        }]);
        let shifted = pot.plus_gradient(&psi).unwrap();
        for q in Domain::default().sample_points(SAMPLES, 3) {
            let f0 = pot.curvature(&q).unwrap();
            let f1 = shifted.curvature(&q).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(f0[0][i][j], f1[0][i][j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn so3_constant_curvature_matches_contraction_oracle() {
        let a = 0.6;
        let pot = GaugePotential::so3_constant(a);
        let sc = StructureConstants::so3();
        let f = pot.curvature(&[0.1, 0.2, -0.3]).unwrap();
        // Brute-force contraction oracle: F^(s)_ij = sum c^s_{kr} a d^k_i a d^r_j.
        for s in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut expect = 0.0;
                    for k in 0..3 {
                        for r in 0..3 {
                            let (di, dj) = ((k == i) as u8 as f64, (r == j) as u8 as f64);
                            expect += sc.get(s, k, r) * a * di * a * dj;
                        }
                    }
                    assert_abs_diff_eq!(f[s][i][j], expect, epsilon = 1e-14);
                }
            }
        }
        // Closed form a^2 eps_{sij} for a cyclic slot.
        assert_abs_diff_eq!(f[2][0][1], a * a, epsilon = 1e-14);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let pot = GaugePotential::random_trig(
            StructureConstants::so3(),
            21,
            RandomTrigOptions::default(),
        );
        let samples = Domain::default().sample_points(SAMPLES, 5);
        let worst = pot.derivative_consistency(&samples).unwrap();
        assert!(worst < 1e-9, "analytic/fd jacobian deviation {worst:e}");
    }

    #[test]
    fn bianchi_zero_for_constant_abelian_curvature() {
        let f = CurvatureField::abelian_f12(FieldExpr::constant(2.5));
        let r = f.bianchi_residual(None, &[0.2, 0.1, -0.4]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    assert_abs_diff_eq!(r[0][i][j][l], 0.0, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn bianchi_detects_non_closed_abelian_curvature() {
        // F_12 = q3: single surviving derivative term d_3 F_12 = 1.
        let f = CurvatureField::abelian_f12(FieldExpr::linear(2, 1.0));
        let r = f.bianchi_residual(None, &[0.05, -0.1, 0.2]).unwrap();
        assert_abs_diff_eq!(r[0][0][1][2], 1.0, epsilon = 1e-10);
        // Cyclic symmetry R_ijl = R_jli by construction.
        assert_eq!(r[0][0][1][2], r[0][1][2][0]);
    }

    #[test]
    fn bianchi_vanishes_for_derived_curvatures() {
        let cases = [
            GaugePotential::random_trig(
                StructureConstants::abelian(1),
                31,
                RandomTrigOptions::default(),
            ),
            GaugePotential::random_trig(StructureConstants::so3(), 32, RandomTrigOptions::default()),
            GaugePotential::so3_constant(0.8),
        ];
        for pot in cases {
            let f = CurvatureField::derived(pot);
            for q in Domain::default().sample_points(SAMPLES, 13) {
                let r = f.bianchi_residual(None, &q).unwrap();
                for s in 0..f.dim() {
                    for i in 0..3 {
                        for j in 0..3 {
                            for l in 0..3 {
                                assert!(
                                    r[s][i][j][l].abs() < 1e-6,
                                    "derived curvature residual {:e} at {q:?}",
                                    r[s][i][j][l]
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nonabelian_free_standing_requires_potential() {
        let comps = vec![
            [FieldExpr::constant(1.0), FieldExpr::zero(), FieldExpr::zero()],
            [FieldExpr::zero(), FieldExpr::zero(), FieldExpr::zero()],
            [FieldExpr::zero(), FieldExpr::zero(), FieldExpr::zero()],
        ];
        let f = CurvatureField::free_standing(StructureConstants::so3(), comps).unwrap();
        assert!(matches!(
            f.bianchi_residual(None, &[0.0; 3]),
            Err(Error::MissingPotential)
        ));
    }

    #[test]
    fn out_of_domain_point_is_rejected() {
        let pot = GaugePotential::random_trig(
            StructureConstants::abelian(1),
            2,
            RandomTrigOptions::default(),
        );
        assert!(matches!(
            pot.value(&[2.0, 0.0, 0.0]),
            Err(Error::OutsideDomain(..))
        ));
        let wide = GaugePotential::uniform_b(1.0);
        assert!(wide.value(&[2.0, 0.0, 0.0]).is_ok());
        assert!(matches!(
            wide.value(&[9.0, 0.0, 0.0]),
            Err(Error::OutsideDomain(..))
        ));
    }

    #[test]
    fn perturbation_shifts_single_component() {
        let base = CurvatureField::derived(GaugePotential::uniform_b(1.0));
        let pert = base.perturbed(0, 0, 1, FieldExpr::linear(2, 0.01));
        let q = [0.1, 0.4, 0.5];
        let f = pert.eval(&q).unwrap();
        assert_abs_diff_eq!(f[0][0][1], 1.0 + 0.01 * 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f[0][1][0], -(1.0 + 0.01 * 0.5), epsilon = 1e-14);
    }
}
