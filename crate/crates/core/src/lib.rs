//! Reduced Poisson structures for charged particles and electromagnetic fields.
//!
//! The crate provides:
//!
//! - [`lie_algebra`]: structure-constant arithmetic and the coadjoint
//!   invariance gate used by the reduction layer;
//! - [`gauge`]: gauge potentials over a spatial box, their curvature tensors
//!   and Bianchi residuals;
//! - [`poisson`]: the five point-dependent bracket tables (canonical,
//!   magnetic, reduced, extended, canonicalized), bracket evaluation, the
//!   jacobiator, and the minimal-coupling transform;
//! - [`dynamics`]: Hamiltonian particle integration under any bracket table
//!   with conservation diagnostics;
//! - [`maxwell`]: periodic-grid vacuum fields, the two Hamiltonian structures
//!   of the Maxwell equations, momentum maps and potential representations;
//! - [`reduction`]: reduced symplectic two-forms and their consistency checks
//!   against the bracket tables.
//!
//! Batch scans (sample sweeps, spectral mode loops) run in parallel through
//! rayon when the `parallel` feature (default) is enabled; see [`exec`].

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod gauge;
pub mod lie_algebra;
pub mod maxwell;
pub mod poisson;
pub mod reduction;

pub use error::{Error, Result};
pub use exec::ExecMode;
