//! Point-dependent Poisson bivectors: the five bracket tables, bracket
//! evaluation, the coordinate jacobiator, and the minimal-coupling transform.
//!
//! # Coordinates and orientation
//!
//! Phase coordinates are ordered `(q^1..q^3, p_1..p_3, u^1..u^n, y_1..y_n)`;
//! the bivector entry `P_ab` is the bracket `{x_a, x_b}`. Every table is
//! realized with the canonical pairs oriented as `{q^i, p_j} = d_ij` and
//! `{u^s, y_k} = d_sk`, so the `(q,p)` and `(u,y)` sectors are the blocks
//! `[[0, I], [-I, 0]]` and Hamiltonian flows satisfy `qdot = dH/dp`.
//!
//! With that orientation the field-dependent entries are
//!
//! ```text
//! {p_i, p_j} = sum_s w_s F^(s)_ij(q)      w = 1 / e / y  (magnetic / reduced / extended)
//! {p_i, u^s} = A^(s)_i(q)                 extended only
//! {p_i, y_s} = sum_{r,l} c^l_{sr} y_l A^(r)_i(q)   extended only, zero when abelian
//! {y_s, y_k} = sum_r c^r_{sk} y_r         extended and canonicalized
//! ```
//!
//! The charge cross entry `{p, y}` is the unique completion for which the
//! momentum shift `p -> p + sum_s y_s A^(s)(q)` maps the extended table
//! exactly onto the canonicalized one; it vanishes for abelian algebras.
//!
//! # Sign constants
//!
//! The jacobiator implemented here is the contraction
//! `J_abc = sum_d (P_da d_d P_bc + P_db d_d P_ca + P_dc d_d P_ab)`, which is
//! minus the nested cyclic sum `{f,{g,h}} + cyc` on coordinate functions
//! ([`JACOBIATOR_NESTED_SIGN`]). On momentum triples of the field tables it
//! equals `+1` times the (weight-contracted) Bianchi residual of the
//! curvature data ([`JACOBIATOR_BIANCHI_SIGN`]).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Vector3};
use serde_json::json;

use crate::exec::{self, ExecMode};
use crate::gauge::{CurvatureField, Domain, GaugePotential, FD_STEP};
use crate::lie_algebra::{DualElement, StructureConstants, AXIOM_TOLERANCE};
use crate::{Error, Result};

/// The jacobiator convention used here equals this sign times the nested
/// cyclic sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}`.
pub const JACOBIATOR_NESTED_SIGN: f64 = -1.0;

/// Coordinate jacobiators of the field tables equal this sign times the
/// contracted Bianchi residual from [`crate::gauge`].
pub const JACOBIATOR_BIANCHI_SIGN: f64 = 1.0;

/// Particle state: position, momentum, and optional internal pair `(u, y)`
/// of configuration and charge variables with the algebra dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vector3<f64>,
    pub p: Vector3<f64>,
    pub internal: Option<InternalVars>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InternalVars {
    pub u: DVector<f64>,
    pub y: DVector<f64>,
}

impl PhasePoint {
    pub fn canonical(q: [f64; 3], p: [f64; 3]) -> Self {
        Self {
            q: Vector3::from(q),
            p: Vector3::from(p),
            internal: None,
        }
    }

    /// Point carrying internal variables; `u` and `y` must have equal length.
    pub fn with_internal(q: [f64; 3], p: [f64; 3], u: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::Shape {
                expected: u.len(),
                got: y.len(),
                context: "internal variables",
            });
        }
        Ok(Self {
            q: Vector3::from(q),
            p: Vector3::from(p),
            internal: Some(InternalVars {
                u: DVector::from_vec(u),
                y: DVector::from_vec(y),
            }),
        })
    }

    pub fn internal_dim(&self) -> usize {
        self.internal.as_ref().map_or(0, |iv| iv.u.len())
    }

    /// Number of active phase coordinates.
    pub fn dim(&self) -> usize {
        6 + 2 * self.internal_dim()
    }

    pub fn q_array(&self) -> [f64; 3] {
        [self.q[0], self.q[1], self.q[2]]
    }

    pub fn coord(&self, idx: usize) -> f64 {
        let n = self.internal_dim();
        match idx {
            0..=2 => self.q[idx],
            3..=5 => self.p[idx - 3],
            _ if idx < 6 + n => self.internal.as_ref().unwrap().u[idx - 6],
            _ if idx < 6 + 2 * n => self.internal.as_ref().unwrap().y[idx - 6 - n],
            _ => panic!("coordinate index {idx} out of range"),
        }
    }

    pub fn set_coord(&mut self, idx: usize, value: f64) {
        let n = self.internal_dim();
        match idx {
            0..=2 => self.q[idx] = value,
            3..=5 => self.p[idx - 3] = value,
            _ if idx < 6 + n => self.internal.as_mut().unwrap().u[idx - 6] = value,
            _ if idx < 6 + 2 * n => self.internal.as_mut().unwrap().y[idx - 6 - n] = value,
            _ => panic!("coordinate index {idx} out of range"),
        }
    }

    pub fn coords(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| self.coord(i))
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim()).all(|i| self.coord(i).is_finite())
    }
}

/// Human-readable coordinate names in storage order.
pub fn coord_names(internal_dim: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=3).map(|i| format!("q{i}")).collect();
    names.extend((1..=3).map(|i| format!("p{i}")));
    names.extend((1..=internal_dim).map(|s| format!("u{s}")));
    names.extend((1..=internal_dim).map(|s| format!("y{s}")));
    names
}

/// Deterministic sample points for scans: `q` uniform in the domain, `p`
/// (and `u`, `y` when `internal_dim > 0`) uniform in `[-1, 1]`.
pub fn sample_phase_points(
    domain: &Domain,
    internal_dim: usize,
    count: usize,
    seed: u64,
) -> Vec<PhasePoint> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut q = [0.0; 3];
            for (i, qi) in q.iter_mut().enumerate() {
                *qi = rng.gen_range(domain.min[i]..domain.max[i]);
            }
            let p = [(); 3].map(|_| rng.gen_range(-1.0..1.0));
            if internal_dim == 0 {
                PhasePoint::canonical(q, p)
            } else {
                let u = (0..internal_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y = (0..internal_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                PhasePoint::with_internal(q, p, u, y).expect("matched lengths")
            }
        })
        .collect()
}

/// Test function on phase points, with an analytic or finite-difference
/// gradient.
#[derive(Clone)]
pub struct Observable {
    name: String,
    eval: Arc<dyn Fn(&PhasePoint) -> f64 + Send + Sync>,
    gradient: GradientMode,
}

#[derive(Clone)]
pub enum GradientMode {
    FiniteDifference { step: f64 },
    Analytic(Arc<dyn Fn(&PhasePoint) -> DVector<f64> + Send + Sync>),
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable").field("name", &self.name).finish()
    }
}

impl Observable {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&PhasePoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            gradient: GradientMode::FiniteDifference { step: FD_STEP },
        }
    }

    pub fn with_analytic_gradient(
        mut self,
        grad: impl Fn(&PhasePoint) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = GradientMode::Analytic(Arc::new(grad));
        self
    }

    /// The coordinate function `x_idx` (exact gradient).
    pub fn coordinate(idx: usize) -> Self {
        Self {
            name: format!("x{idx}"),
            eval: Arc::new(move |x| x.coord(idx)),
            gradient: GradientMode::Analytic(Arc::new(move |x| {
                let mut g = DVector::zeros(x.dim());
                g[idx] = 1.0;
                g
            })),
        }
    }

    /// Pointwise product `f * g` (finite-difference gradient).
    pub fn product(f: &Observable, g: &Observable) -> Self {
        let (ef, eg) = (f.eval.clone(), g.eval.clone());
        Self::new(format!("{}*{}", f.name, g.name), move |x| ef(x) * eg(x))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &PhasePoint) -> f64 {
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &PhasePoint) -> Result<DVector<f64>> {
        let g = match &self.gradient {
            GradientMode::Analytic(grad) => grad(x),
            GradientMode::FiniteDifference { step } => {
                let h = *step;
                DVector::from_fn(x.dim(), |d, _| {
                    let f = |v: f64| {
                        let mut xx = x.clone();
                        xx.set_coord(d, v);
                        (self.eval)(&xx)
                    };
                    crate::gauge::central4(f, x.coord(d), h)
                })
            }
        };
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "gradient of {} not finite at q = {:?}",
                self.name,
                x.q_array()
            )));
        }
        Ok(g)
    }
}

/// One of the five bracket tables, bound to its field data.
#[derive(Debug, Clone)]
pub enum BracketSpec {
    /// `{q^i, p_j} = d_ij` (and `{u^s, y_k} = d_sk` when internal variables
    /// are present).
    Canonical,
    /// Canonical plus the abelian magnetic block `{p_i, p_j} = F_ij(q)`.
    Magnetic { curvature: CurvatureField },
    /// Canonical plus `{p_i, p_j} = sum_s e_s F^(s)_ij(q)` for an invariant
    /// dual element `e`; construction enforces the invariance gate.
    ReducedYm {
        curvature: CurvatureField,
        xi: DualElement,
    },
    /// Full table on `(q, p, u, y)` with the minimal-coupling cross entries.
    ExtendedYm {
        curvature: CurvatureField,
        potential: GaugePotential,
    },
    /// Image of the extended table under the momentum shift: canonical pairs
    /// plus the Lie-Poisson charge block.
    CanonicalizedYm { algebra: StructureConstants },
}

impl BracketSpec {
    pub fn magnetic(curvature: CurvatureField) -> Result<Self> {
        if curvature.dim() != 1 || !curvature.algebra().is_abelian() {
            return Err(Error::BracketConfig(
                "magnetic bracket requires an abelian curvature with n = 1".into(),
            ));
        }
        Ok(BracketSpec::Magnetic { curvature })
    }

    pub fn reduced_ym(curvature: CurvatureField, xi: DualElement) -> Result<Self> {
        if xi.dim() != curvature.dim() {
            return Err(Error::Shape {
                expected: curvature.dim(),
                got: xi.dim(),
                context: "dual element vs curvature algebra",
            });
        }
        curvature.algebra().check_invariance(&xi, AXIOM_TOLERANCE)?;
        Ok(BracketSpec::ReducedYm { curvature, xi })
    }

    pub fn extended_ym(curvature: CurvatureField, potential: GaugePotential) -> Result<Self> {
        if curvature.algebra() != potential.algebra() {
            return Err(Error::BracketConfig(
                "extended bracket requires matching curvature and potential algebras".into(),
            ));
        }
        Ok(BracketSpec::ExtendedYm {
            curvature,
            potential,
        })
    }

    pub fn canonicalized_ym(algebra: StructureConstants) -> Self {
        BracketSpec::CanonicalizedYm { algebra }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BracketSpec::Canonical => "canonical",
            BracketSpec::Magnetic { .. } => "magnetic",
            BracketSpec::ReducedYm { .. } => "reduced_ym",
            BracketSpec::ExtendedYm { .. } => "extended_ym",
            BracketSpec::CanonicalizedYm { .. } => "canonicalized_ym",
        }
    }

    /// Internal dimension the kind demands of a phase point; `None` means
    /// the point's own layout is accepted.
    fn required_internal(&self) -> Option<usize> {
        match self {
            BracketSpec::Canonical => None,
            BracketSpec::Magnetic { .. } | BracketSpec::ReducedYm { .. } => Some(0),
            BracketSpec::ExtendedYm { curvature, .. } => Some(curvature.dim()),
            BracketSpec::CanonicalizedYm { algebra } => Some(algebra.dim()),
        }
    }

    pub fn validate_point(&self, x: &PhasePoint) -> Result<()> {
        if let Some(required) = self.required_internal() {
            if x.internal_dim() != required {
                return Err(Error::BracketConfig(format!(
                    "{} bracket requires internal dimension {required}, point has {}",
                    self.kind_name(),
                    x.internal_dim()
                )));
            }
        }
        Ok(())
    }

    /// The antisymmetric matrix `P_ab = {x_a, x_b}` over the point's active
    /// coordinates. Antisymmetry is exact by construction.
    pub fn bivector(&self, x: &PhasePoint) -> Result<DMatrix<f64>> {
        self.validate_point(x)?;
        let n = x.internal_dim();
        let dim = x.dim();
        let mut pi = DMatrix::zeros(dim, dim);
        let set = |a: usize, b: usize, v: f64, pi: &mut DMatrix<f64>| {
            pi[(a, b)] = v;
            pi[(b, a)] = -v;
        };

        // Canonical (q, p) block, shared by every kind.
        for i in 0..3 {
            set(i, 3 + i, 1.0, &mut pi);
        }

        match self {
            BracketSpec::Canonical => {
                for s in 0..n {
                    set(6 + s, 6 + n + s, 1.0, &mut pi);
                }
            }
            BracketSpec::Magnetic { curvature } => {
                let f = curvature.eval(&x.q_array())?;
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        set(3 + i, 3 + j, f[0][i][j], &mut pi);
                    }
                }
            }
            BracketSpec::ReducedYm { curvature, xi } => {
                let f = curvature.eval(&x.q_array())?;
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let v = (0..xi.dim()).map(|s| xi.component(s) * f[s][i][j]).sum();
                        set(3 + i, 3 + j, v, &mut pi);
                    }
                }
            }
            BracketSpec::ExtendedYm {
                curvature,
                potential,
            } => {
                let q = x.q_array();
                let f = curvature.eval(&q)?;
                let a = potential.value(&q)?;
                let sc = curvature.algebra();
                let y = &x.internal.as_ref().expect("validated").y;
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        let v = (0..n).map(|s| y[s] * f[s][i][j]).sum();
                        set(3 + i, 3 + j, v, &mut pi);
                    }
                }
                for i in 0..3 {
                    for s in 0..n {
                        // {p_i, u^s} = A^(s)_i
                        set(3 + i, 6 + s, a[s][i], &mut pi);
                        // {p_i, y_s} = sum_{r,l} c^l_{sr} y_l A^(r)_i
                        let mut w = 0.0;
                        for r in 0..n {
                            for l in 0..n {
                                let c = sc.get(l, s, r);
                                if c != 0.0 {
                                    w += c * y[l] * a[r][i];
                                }
                            }
                        }
                        set(3 + i, 6 + n + s, w, &mut pi);
                    }
                }
                for s in 0..n {
                    set(6 + s, 6 + n + s, 1.0, &mut pi);
                }
                for s in 0..n {
                    for k in (s + 1)..n {
                        let v = (0..n).map(|r| sc.get(r, s, k) * y[r]).sum();
                        set(6 + n + s, 6 + n + k, v, &mut pi);
                    }
                }
            }
            BracketSpec::CanonicalizedYm { algebra } => {
                let y = &x.internal.as_ref().expect("validated").y;
                for s in 0..n {
                    set(6 + s, 6 + n + s, 1.0, &mut pi);
                }
                for s in 0..n {
                    for k in (s + 1)..n {
                        let v = (0..n).map(|r| algebra.get(r, s, k) * y[r]).sum();
                        set(6 + n + s, 6 + n + k, v, &mut pi);
                    }
                }
            }
        }
        Ok(pi)
    }

    /// `{f, g}(x) = grad f . P . grad g`.
    pub fn bracket(&self, f: &Observable, g: &Observable, x: &PhasePoint) -> Result<f64> {
        let pi = self.bivector(x)?;
        let gf = f.gradient(x)?;
        let gg = g.gradient(x)?;
        Ok((gf.transpose() * pi * gg)[(0, 0)])
    }

    /// Bivector partial derivatives `d_d P` for all coordinates `d`, by the
    /// shared 4th-order stencil applied entrywise.
    fn bivector_derivatives(&self, x: &PhasePoint) -> Result<Vec<DMatrix<f64>>> {
        let dim = x.dim();
        let h = FD_STEP;
        let mut out = Vec::with_capacity(dim);
        for d in 0..dim {
            let eval = |v: f64| -> Result<DMatrix<f64>> {
                let mut xx = x.clone();
                xx.set_coord(d, v);
                self.bivector(&xx)
            };
            let x0 = x.coord(d);
            let pp = eval(x0 + h)?;
            let pm = eval(x0 - h)?;
            let pp2 = eval(x0 + 2.0 * h)?;
            let pm2 = eval(x0 - 2.0 * h)?;
            out.push((pp - pm).scale(8.0 / (12.0 * h)) - (pp2 - pm2).scale(1.0 / (12.0 * h)));
        }
        Ok(out)
    }

    /// Coordinate jacobiator
    /// `J_abc = sum_d (P_da d_d P_bc + P_db d_d P_ca + P_dc d_d P_ab)`.
    pub fn jacobiator(&self, x: &PhasePoint, triple: (usize, usize, usize)) -> Result<f64> {
        let pi = self.bivector(x)?;
        let dpi = self.bivector_derivatives(x)?;
        Ok(jacobiator_from_parts(&pi, &dpi, triple))
    }

    /// Max |jacobiator| over all coordinate triples and all sample points.
    pub fn jacobi_scan(&self, points: &[PhasePoint], mode: ExecMode) -> Result<JacobiScan> {
        let per_point = exec::try_map_collect(mode, points, |x| {
            let pi = self.bivector(x)?;
            let dpi = self.bivector_derivatives(x)?;
            let dim = x.dim();
            let mut max_abs = 0.0f64;
            let mut worst = (0, 1, 2);
            for a in 0..dim {
                for b in (a + 1)..dim {
                    for c in (b + 1)..dim {
                        let j = jacobiator_from_parts(&pi, &dpi, (a, b, c));
                        if j.abs() > max_abs {
                            max_abs = j.abs();
                            worst = (a, b, c);
                        }
                    }
                }
            }
            Ok((max_abs, worst))
        })?;
        let mut scan = JacobiScan {
            max_abs: 0.0,
            worst_point: 0,
            worst_triple: (0, 1, 2),
            point_max: Vec::with_capacity(points.len()),
        };
        for (idx, (m, triple)) in per_point.iter().enumerate() {
            scan.point_max.push(*m);
            if *m > scan.max_abs {
                scan.max_abs = *m;
                scan.worst_point = idx;
                scan.worst_triple = *triple;
            }
        }
        Ok(scan)
    }

    /// JSON dump of the structurally nonzero table entries with sampled
    /// values at `x`.
    pub fn table_json(&self, x: &PhasePoint) -> Result<serde_json::Value> {
        let pi = self.bivector(x)?;
        let n = x.internal_dim();
        let names = coord_names(n);
        let mut entries = Vec::new();
        for a in 0..x.dim() {
            for b in (a + 1)..x.dim() {
                if let Some(form) = self.entry_form(a, b, n) {
                    entries.push(json!({
                        "a": names[a],
                        "b": names[b],
                        "form": form,
                        "value": pi[(a, b)],
                    }));
                }
            }
        }
        Ok(json!({
            "kind": self.kind_name(),
            "coordinates": names,
            "entries": entries,
        }))
    }

    /// Formula string for a structurally nonzero entry, if any.
    fn entry_form(&self, a: usize, b: usize, n: usize) -> Option<String> {
        let block = |idx: usize| -> (usize, usize) {
            // (sector, offset): 0 = q, 1 = p, 2 = u, 3 = y
            match idx {
                0..=2 => (0, idx),
                3..=5 => (1, idx - 3),
                _ if idx < 6 + n => (2, idx - 6),
                _ => (3, idx - 6 - n),
            }
        };
        let ((sa, ia), (sb, ib)) = (block(a), block(b));
        match (self, sa, sb) {
            (_, 0, 1) if ia == ib => Some("1".into()),
            (BracketSpec::Canonical, 2, 3) if ia == ib => Some("1".into()),
            (BracketSpec::Magnetic { .. }, 1, 1) => Some(format!("F_{}{}(q)", ia + 1, ib + 1)),
            (BracketSpec::ReducedYm { .. }, 1, 1) => {
                Some(format!("sum_s e_s F^(s)_{}{}(q)", ia + 1, ib + 1))
            }
            (BracketSpec::ExtendedYm { .. }, 1, 1) => {
                Some(format!("sum_s y_s F^(s)_{}{}(q)", ia + 1, ib + 1))
            }
            (BracketSpec::ExtendedYm { .. }, 1, 2) => {
                Some(format!("A^({})_{}(q)", ib + 1, ia + 1))
            }
            (BracketSpec::ExtendedYm { .. }, 1, 3) => Some(format!(
                "sum_rl c^l_({})r y_l A^(r)_{}(q)",
                ib + 1,
                ia + 1
            )),
            (BracketSpec::ExtendedYm { .. } | BracketSpec::CanonicalizedYm { .. }, 2, 3)
                if ia == ib =>
            {
                Some("1".into())
            }
            (BracketSpec::ExtendedYm { .. } | BracketSpec::CanonicalizedYm { .. }, 3, 3) => {
                Some(format!("sum_r c^r_({}{}) y_r", ia + 1, ib + 1))
            }
            _ => None,
        }
    }
}

fn jacobiator_from_parts(
    pi: &DMatrix<f64>,
    dpi: &[DMatrix<f64>],
    (a, b, c): (usize, usize, usize),
) -> f64 {
    let dim = pi.nrows();
    let mut j = 0.0;
    for d in 0..dim {
        j += pi[(d, a)] * dpi[d][(b, c)] + pi[(d, b)] * dpi[d][(c, a)] + pi[(d, c)] * dpi[d][(a, b)];
    }
    j
}

/// Result of a jacobiator sweep.
#[derive(Debug, Clone)]
pub struct JacobiScan {
    pub max_abs: f64,
    pub worst_point: usize,
    pub worst_triple: (usize, usize, usize),
    pub point_max: Vec<f64>,
}

/// Momentum shift `p -> p + sum_s y_s A^(s)(q)`; `q`, `u`, `y` unchanged.
/// Abelian points without internal variables use unit charge.
pub fn minimal_coupling(x: &PhasePoint, pot: &GaugePotential) -> Result<PhasePoint> {
    coupling_shift(x, pot, 1.0)
}

/// Exact inverse of [`minimal_coupling`].
pub fn minimal_coupling_inverse(x: &PhasePoint, pot: &GaugePotential) -> Result<PhasePoint> {
    coupling_shift(x, pot, -1.0)
}

fn coupling_shift(x: &PhasePoint, pot: &GaugePotential, sign: f64) -> Result<PhasePoint> {
    let n = pot.dim();
    let a = pot.value(&x.q_array())?;
    let mut out = x.clone();
    match &x.internal {
        Some(iv) => {
            if iv.y.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: iv.y.len(),
                    context: "internal charge vs potential algebra",
                });
            }
            for i in 0..3 {
                let shift: f64 = (0..n).map(|s| iv.y[s] * a[s][i]).sum();
                out.p[i] += sign * shift;
            }
        }
        None if n == 1 => {
            // Unit charge for internal-free abelian points.
            for i in 0..3 {
                out.p[i] += sign * a[0][i];
            }
        }
        None => {
            return Err(Error::BracketConfig(
                "minimal coupling with n > 1 requires internal variables".into(),
            ))
        }
    }
    Ok(out)
}

/// Jacobian of [`minimal_coupling`] at `x`, over the point's coordinates.
pub fn coupling_jacobian(x: &PhasePoint, pot: &GaugePotential) -> Result<DMatrix<f64>> {
    let n = x.internal_dim();
    let dim = x.dim();
    let mut jac = DMatrix::identity(dim, dim);
    let da = pot.jacobian(&x.q_array())?;
    let a = pot.value(&x.q_array())?;
    match &x.internal {
        Some(iv) => {
            for i in 0..3 {
                for m in 0..3 {
                    jac[(3 + i, m)] = (0..n).map(|s| iv.y[s] * da[s][i][m]).sum();
                }
                for s in 0..n {
                    jac[(3 + i, 6 + n + s)] = a[s][i];
                }
            }
        }
        None if pot.dim() == 1 => {
            for i in 0..3 {
                for m in 0..3 {
                    jac[(3 + i, m)] = da[0][i][m];
                }
            }
        }
        None => {
            return Err(Error::BracketConfig(
                "minimal coupling with n > 1 requires internal variables".into(),
            ))
        }
    }
    Ok(jac)
}

/// Report from [`canonicalization_residual`].
#[derive(Debug, Clone)]
pub struct CanonicalizationReport {
    pub max_deviation: f64,
    pub worst_sample: usize,
    pub worst_entry: (String, String),
}

/// Push the extended bivector through the momentum shift and measure the
/// maximum entrywise deviation from the canonicalized table over the sample.
pub fn canonicalization_residual(
    potential: &GaugePotential,
    curvature: &CurvatureField,
    samples: &[PhasePoint],
    mode: ExecMode,
) -> Result<CanonicalizationReport> {
    let extended = BracketSpec::extended_ym(curvature.clone(), potential.clone())?;
    let target = BracketSpec::canonicalized_ym(potential.algebra().clone());
    let per_sample = exec::try_map_collect(mode, samples, |x| {
        let pi = extended.bivector(x)?;
        let jac = coupling_jacobian(x, potential)?;
        let pushed = &jac * pi * jac.transpose();
        let canon = target.bivector(&minimal_coupling(x, potential)?)?;
        let mut worst = 0.0f64;
        let mut entry = (0usize, 0usize);
        for a in 0..x.dim() {
            for b in 0..x.dim() {
                let dev = (pushed[(a, b)] - canon[(a, b)]).abs();
                if dev > worst {
                    worst = dev;
                    entry = (a, b);
                }
            }
        }
        Ok((worst, entry))
    })?;
    let mut report = CanonicalizationReport {
        max_deviation: 0.0,
        worst_sample: 0,
        worst_entry: ("".into(), "".into()),
    };
    for (idx, (dev, (a, b))) in per_sample.iter().enumerate() {
        if *dev >= report.max_deviation {
            let names = coord_names(samples[idx].internal_dim());
            report.max_deviation = *dev;
            report.worst_sample = idx;
            report.worst_entry = (names[*a].clone(), names[*b].clone());
        }
    }
    Ok(report)
}
