use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid medium: {0}")]
    InvalidMedium(&'static str),
    #[error("argument out of domain: {0}")]
    Domain(&'static str),
    #[error("azimuthal order |m| = {m} exceeds phase-function order {n}")]
    EmptySpectrum { m: i32, n: usize },
    #[error("nu = {nu} is not a discrete eigenvalue (|Lambda| = {residual:e})")]
    NotAnEigenvalue { nu: f64, residual: f64 },
    #[error("pole of the eigenfunction hit: |nu - mu| = {distance:e}")]
    PoleHit { distance: f64 },
    #[error("evaluation on the source plane z = z0")]
    JumpPlane,
    #[error("no convergence after {iterations} steps (partial {partial}, error estimate {estimate:e})")]
    Convergence {
        iterations: usize,
        partial: f64,
        estimate: f64,
    },
    #[error("isotropic baseline only (f1 = {0})")]
    NotIsotropic(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
