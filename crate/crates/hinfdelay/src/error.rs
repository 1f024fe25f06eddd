//! Crate-wide error type.

use std::fmt;

use num_complex::Complex64;

/// Errors produced by system construction, linear algebra and the norm
/// algorithms.
#[derive(Debug)]
pub enum Error {
    /// Matrix dimensions are mutually inconsistent.
    DimensionMismatch(String),
    /// A delay term was given a negative delay.
    NegativeDelay { index: usize, tau: f64 },
    /// The resolvent (jω I − A0 − Σ Aᵢ e^(−jωτᵢ)) is numerically singular:
    /// jω sits at or very close to a system pole.
    SingularResolvent { omega: f64 },
    /// D_ξ = DᵀD − ξ²I is numerically singular: ξ is within tolerance of a
    /// singular value of D.
    SingularDxi { xi: f64, sigma1_d: f64 },
    /// Mesh parameters out of range (N < 1 or tau_max ≤ 0).
    InvalidMesh(String),
    /// The mesh interval does not cover the largest delay of the system.
    MeshTooSmall { tau_max: f64, max_delay: f64 },
    /// The dense eigenvalue solver did not converge.
    EigenFailure(String),
    /// The bordered collocation system is numerically singular at this λ
    /// (a spurious pole of the rational function p_N(t; ·)).
    CollocationSingular { lambda: Complex64 },
    /// An iterative algorithm exceeded its iteration budget.
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// System file could not be parsed into a valid system.
    Parse(String),
    /// I/O failure while reading or writing files.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NegativeDelay { index, tau } => {
                write!(f, "delay {index} has negative tau = {tau}")
            }
            Error::SingularResolvent { omega } => {
                write!(f, "resolvent is singular at omega = {omega} (system pole?)")
            }
            Error::SingularDxi { xi, sigma1_d } => write!(
                f,
                "D_xi is singular at xi = {xi}: xi is too close to a singular value of D \
                 (sigma_1(D) = {sigma1_d})"
            ),
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::MeshTooSmall { tau_max, max_delay } => write!(
                f,
                "mesh interval half-width {tau_max} is smaller than the largest delay {max_delay}"
            ),
            Error::EigenFailure(msg) => write!(f, "eigenvalue computation failed: {msg}"),
            Error::CollocationSingular { lambda } => {
                write!(f, "collocation system is singular at lambda = {lambda}")
            }
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge within {iterations} iterations")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
