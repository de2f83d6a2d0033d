//! Periodic-grid vacuum electromagnetic fields: spectral differential
//! operators, the two Hamiltonian structures generating the field equations,
//! momentum maps, potential representations, and time evolution.

mod evolve;
mod grid;
mod io;
mod spectral;
mod state;

pub use evolve::{
    evolve, structure_rhs, EvolveOptions, EvolveResult, HamiltonianStructure, StepDiagnostics,
};
pub use grid::{GridSpec, ScalarField, VectorField};
pub use io::{read_snapshot, write_diagnostics_csv, write_snapshot};
pub use spectral::{MomentumMapReport, Spectral, INVERSE_CURL_TOLERANCE};
pub use state::{ChargeDensity, FieldState, PotentialState};
