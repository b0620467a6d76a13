//! Spectral toolkit for the Hartree equation on the torus `[0, L)³` in the
//! momentum representation.
//!
//! The order parameter is stored as truncated Fourier coefficients
//! ([`SpectralState`]); [`HartreeSystem`] advances them, [`diagnostics`]
//! measures them against closed-form bounds and [`scan`] runs parameter
//! ladders.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod potential;
mod quadrature;
pub mod run;
pub mod scan;
mod spline;
pub mod verify;

pub use diagnostics::{DiagnosticsContext, DiagnosticsRecord};
pub use error::{Error, Result};
pub use evolution::{HartreeSystem, IntegratorConfig, Method, PicardConfig, RhsMethod, Trajectory};
pub use field::{AutoCorrelation, CorrelationMethod, Mode, SpectralState, StateSpec, TorusLattice};
pub use potential::{PotentialModel, PotentialSpec};
pub use quadrature::gauss_legendre;
