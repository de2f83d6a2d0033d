//! Run configuration: one TOML file fully determines a run.

use serde::{Deserialize, Serialize};
use symred_core::gauge::{
    CurvatureField, DerivativeMode, Domain, FieldExpr, GaugePotential, Monomial, RandomTrigOptions,
    TrigMode,
};
use symred_core::lie_algebra::StructureConstants;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    VerifyJacobi,
    VerifyBianchi,
    VerifyMinimalCoupling,
    VerifyReduction,
    SimulateParticle,
    SimulateMaxwell,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::VerifyJacobi => "verify-jacobi",
            Mode::VerifyBianchi => "verify-bianchi",
            Mode::VerifyMinimalCoupling => "verify-minimal-coupling",
            Mode::VerifyReduction => "verify-reduction",
            Mode::SimulateParticle => "simulate-particle",
            Mode::SimulateMaxwell => "simulate-maxwell",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub algebra: AlgebraConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub particle: ParticleConfig,
    #[serde(default)]
    pub maxwell: MaxwellConfig,
    #[serde(default)]
    pub reduction: ReductionConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub preset: String,
    #[serde(default)]
    pub dim: Option<usize>,
    /// Sparse entries `(r, s, k, value)` with 1-based indices and implied
    /// antisymmetric completion; used when `preset = "triples"`.
    #[serde(default)]
    pub triples: Vec<(usize, usize, usize, f64)>,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            preset: "abelian".into(),
            dim: None,
            triples: Vec::new(),
        }
    }
}

impl AlgebraConfig {
    pub fn build(&self) -> Result<StructureConstants, CliError> {
        match self.preset.as_str() {
            "abelian" => Ok(StructureConstants::abelian(self.dim.unwrap_or(1))),
            "so3" => Ok(StructureConstants::so3()),
            "heisenberg" => Ok(StructureConstants::heisenberg()),
            "triples" => {
                let dim = self.dim.ok_or_else(|| {
                    CliError::Config("algebra.dim is required with preset = \"triples\"".into())
                })?;
                let zero_based: Vec<_> = self
                    .triples
                    .iter()
                    .map(|&(r, s, k, v)| {
                        if r == 0 || s == 0 || k == 0 {
                            Err(CliError::Config(
                                "algebra.triples indices are 1-based".into(),
                            ))
                        } else {
                            Ok((r - 1, s - 1, k - 1, v))
                        }
                    })
                    .collect::<Result<_, _>>()?;
                let sc = StructureConstants::from_triples(dim, &zero_based)?;
                let report = sc.validate();
                if !report.is_valid() {
                    return Err(CliError::Config(format!(
                        "algebra.triples violate the Lie axioms (max residual {:e})",
                        report.max_residual
                    )));
                }
                Ok(sc)
            }
            other => Err(CliError::Config(format!(
                "unknown algebra preset \"{other}\" (expected abelian, so3, heisenberg, triples)"
            ))),
        }
    }
}

/// Component entry for `preset = "table"`: monomials are
/// `[p1, p2, p3, coeff]`, trig modes are `[k1, k2, k3, cos_amp, sin_amp]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentTable {
    pub s: usize,
    pub j: usize,
    #[serde(default)]
    pub monomials: Vec<(u32, u32, u32, f64)>,
    #[serde(default)]
    pub trig: Vec<(i32, i32, i32, f64, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub preset: String,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default)]
    pub coeffs: Option<[[f64; 3]; 3]>,
    #[serde(default = "default_modes")]
    pub modes_per_component: usize,
    #[serde(default = "default_wavenumber")]
    pub max_wavenumber: i32,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub components: Vec<ComponentTable>,
    #[serde(default)]
    pub derivative_mode: Option<String>,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_b() -> f64 {
    1.0
}
fn default_a() -> f64 {
    0.5
}
fn default_modes() -> usize {
    4
}
fn default_wavenumber() -> i32 {
    3
}
fn default_amplitude() -> f64 {
    0.5
}
fn default_fd_step() -> f64 {
    symred_core::gauge::FD_STEP
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            preset: "random-trig".into(),
            b: default_b(),
            a: default_a(),
            coeffs: None,
            modes_per_component: default_modes(),
            max_wavenumber: default_wavenumber(),
            amplitude: default_amplitude(),
            components: Vec::new(),
            derivative_mode: None,
            fd_step: default_fd_step(),
        }
    }
}

impl PotentialConfig {
    pub fn trig_options(&self) -> RandomTrigOptions {
        RandomTrigOptions {
            modes_per_component: self.modes_per_component,
            max_wavenumber: self.max_wavenumber,
            amplitude: self.amplitude,
        }
    }

    pub fn build(&self, algebra: &StructureConstants, seed: u64) -> Result<GaugePotential, CliError> {
        let pot = match self.preset.as_str() {
            "uniform-b" => GaugePotential::uniform_b(self.b),
            "linear" => {
                let coeffs = self.coeffs.ok_or_else(|| {
                    CliError::Config("potential.coeffs is required with preset = \"linear\"".into())
                })?;
                GaugePotential::linear_abelian(coeffs)
            }
            "so3-constant" => GaugePotential::so3_constant(self.a),
            "random-trig" => {
                GaugePotential::random_trig(algebra.clone(), seed, self.trig_options())
            }
            "zero" => GaugePotential::zero(algebra.clone()),
            "table" => {
                let n = algebra.dim();
                let mut comps: Vec<[FieldExpr; 3]> = (0..n)
                    .map(|_| [FieldExpr::zero(), FieldExpr::zero(), FieldExpr::zero()])
                    .collect();
                for entry in &self.components {
                    if entry.s == 0 || entry.s > n || entry.j == 0 || entry.j > 3 {
                        return Err(CliError::Config(format!(
                            "potential.components entry (s = {}, j = {}) out of range (1-based)",
                            entry.s, entry.j
                        )));
                    }
                    let expr = FieldExpr {
                        monomials: entry
                            .monomials
                            .iter()
                            .map(|&(p1, p2, p3, coeff)| Monomial {
                                powers: [p1, p2, p3],
                                coeff,
                            })
                            .collect(),
                        trig: entry
                            .trig
                            .iter()
                            .map(|&(k1, k2, k3, cos_amp, sin_amp)| TrigMode {
                                wave: [k1, k2, k3],
                                cos_amp,
                                sin_amp,
                            })
                            .collect(),
                    };
                    comps[entry.s - 1][entry.j - 1] = expr;
                }
                GaugePotential::new(
                    algebra.clone(),
                    comps,
                    Domain::default(),
                    DerivativeMode::Analytic,
                )?
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown potential preset \"{other}\" (expected uniform-b, linear, so3-constant, random-trig, zero, table)"
                )))
            }
        };
        Ok(match self.derivative_mode.as_deref() {
            None | Some("analytic") => pot,
            Some("finite-difference") => {
                pot.with_derivative_mode(DerivativeMode::FiniteDifference { step: self.fd_step })
            }
            Some(other) => {
                return Err(CliError::Config(format!(
                    "unknown derivative_mode \"{other}\" (expected analytic, finite-difference)"
                )))
            }
        })
    }

    pub fn curvature(
        &self,
        algebra: &StructureConstants,
        seed: u64,
    ) -> Result<CurvatureField, CliError> {
        Ok(CurvatureField::derived(self.build(algebra, seed)?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub potentials: usize,
    pub points: usize,
    /// Also run the injected non-closed curvature phase.
    pub injection: bool,
    /// Amplitude of the perturbation used by the injection phases that
    /// deform a derived curvature.
    pub delta: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            potentials: 20,
            points: 50,
            injection: true,
            delta: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub jacobi: f64,
    pub bianchi: f64,
    pub residual: f64,
    pub consistency: f64,
    pub closedness: f64,
    pub energy_drift: f64,
    pub rhs_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            jacobi: 1e-6,
            bianchi: 1e-6,
            residual: 1e-6,
            consistency: 1e-12,
            closedness: 1e-10,
            energy_drift: 1e-8,
            rhs_agreement: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub bracket: String,
    pub hamiltonian: String,
    pub method: String,
    pub t_end: f64,
    pub dt: f64,
    pub q0: [f64; 3],
    pub p0: [f64; 3],
    #[serde(default)]
    pub u0: Vec<f64>,
    #[serde(default)]
    pub y0: Vec<f64>,
    /// Dual element components for the reduced bracket.
    #[serde(default)]
    pub xi: Vec<f64>,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self {
            bracket: "magnetic".into(),
            hamiltonian: "free".into(),
            method: "rk4".into(),
            t_end: 2.0 * std::f64::consts::PI,
            dt: 1e-3,
            q0: [0.0; 3],
            p0: [1.0, 0.0, 0.0],
            u0: Vec::new(),
            y0: Vec::new(),
            xi: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellConfig {
    pub n: usize,
    pub l: f64,
    pub structure: String,
    pub initial: String,
    pub max_wavenumber: usize,
    pub t_end: f64,
    pub dt: f64,
    /// 0 disables intermediate snapshots.
    pub snapshot_stride: usize,
}

impl Default for MaxwellConfig {
    fn default() -> Self {
        Self {
            n: 32,
            l: 2.0 * std::f64::consts::PI,
            structure: "helicity".into(),
            initial: "plane-wave".into(),
            max_wavenumber: 3,
            t_end: 2.0 * std::f64::consts::PI,
            dt: 1e-3,
            snapshot_stride: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionConfig {
    /// Dual element; defaults to `e_1 = 1, rest 0`.
    #[serde(default)]
    pub xi: Vec<f64>,
    pub samples: usize,
    pub gate_scan: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            xi: Vec::new(),
            samples: 50,
            gate_scan: 100,
        }
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(CliError::Config(format!(
            "config {} is empty",
            path.display()
        )));
    }
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
