//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Array or vector dimensions do not match the algebra / phase dimension.
    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    Shape {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A point lies outside the configured spatial domain.
    #[error("point ({0}, {1}, {2}) outside the configured domain")]
    OutsideDomain(f64, f64, f64),

    /// Nonabelian Bianchi residual requested without the gauge potential that
    /// enters its quadratic terms.
    #[error("nonabelian Bianchi residual requires the gauge potential")]
    MissingPotential,

    /// The coadjoint invariance gate rejected a dual element.
    #[error("invariance gate failed: residual[{s}][{k}] = {value:e} exceeds {tolerance:e}")]
    Invariance {
        s: usize,
        k: usize,
        value: f64,
        tolerance: f64,
    },

    /// A phase point does not carry the coordinates a bracket kind requires.
    #[error("bracket configuration error: {0}")]
    BracketConfig(String),

    /// A field is not in the range of the requested spectral inversion.
    #[error("field not in operator range: {context} (divergence defect {div_defect:e}, mean defect {mean_defect:e})")]
    NotInRange {
        context: &'static str,
        div_defect: f64,
        mean_defect: f64,
    },

    /// Invalid grid specification.
    #[error("invalid grid: {0}")]
    Grid(String),

    /// A numerical evaluation failed (non-finite intermediate, singular
    /// matrix, failed gradient).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Time integration produced a non-finite state.
    #[error("integration diverged at step {step} (t = {time})")]
    Diverged { step: usize, time: f64 },

    /// Invalid run or scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
