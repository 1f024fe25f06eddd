//! H∞ norms of stable retarded time-delay systems
//!
//! ```text
//! G(s) = C (s I − A0 − Σᵢ Aᵢ e^(−τᵢ s))⁻¹ B + D
//! ```
//!
//! computed by a predictor–corrector scheme: a spectral discretization of
//! the level operator predicts the norm through level-set search over ξ
//! (imaginary-axis eigenvalues of the discretized operator mark the
//! frequencies where a singular value of a rational approximant equals ξ),
//! and a Gauss–Newton iteration on a small nonlinear-eigenvalue system
//! corrects the predicted peaks against the true system.
//!
//! Entry points: [`DelaySystem::new`], [`hinf_norm`], and the brute-force
//! cross-check [`system::grid_oracle_norm`]. The `cli` module backs the
//! `hinfdelay` binary.

pub mod cli;
pub mod collocation;
pub mod error;
pub mod level_matrices;
mod linalg;
pub mod norm;
pub mod spectral;
pub mod sysfile;
pub mod system;

pub use error::{Error, Result};
pub use norm::{hinf_norm, Accuracy, Method, NormOptions, NormResult};
pub use system::{DelaySystem, FrequencyResponse};
