use std::io;

use thiserror::Error;

/// Everything that can go wrong while planning or running a transform.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symplectic (max residual {residual:.3e})")]
    InvalidSymplectic { residual: f64 },
    #[error("matrix is not symmetric positive-definite")]
    NotSpd,
    #[error("Iwasawa angles are degenerate ({0})")]
    DegenerateAngles(&'static str),
    #[error("B block is not symmetric (asymmetry {0:.3e})")]
    BNotSymmetric(f64),
    #[error("B block is singular (det {0:.3e})")]
    BSingular(f64),
    #[error("no symmetric H gives an invertible B' for this matrix")]
    NoFeasiblePoint,
    #[error("fractional angle has vanishing sine (sin alpha {sin_alpha:.3e}, sin beta {sin_beta:.3e})")]
    FrftSingular { sin_alpha: f64, sin_beta: f64 },
    #[error("chirp matrix is not symmetric (asymmetry {0:.3e})")]
    ChirpNotSymmetric(f64),
    #[error("affine matrix is singular")]
    SingularAffine,
    #[error("Hermite-Gaussian order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error("bad grid size: {0}")]
    BadSize(String),
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("image is not square ({width}x{height})")]
    NonSquare { width: usize, height: usize },
    #[error("reference field is identically zero")]
    ZeroReference,
    #[error("fields differ in shape or spacing")]
    ShapeMismatch,
    #[error("operator size N={0} exceeds the dense limit of 64")]
    TooLarge(usize),
    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("GRIN shear matrix is singular (p*q = 1)")]
    SingularShear,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
