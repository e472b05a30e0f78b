use thiserror::Error;

/// Errors raised by the point-interaction toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nu^2 = det A - (tr A / 2)^2 is not real (imaginary part {imag:e})")]
    NonRealNuSquared { imag: f64 },

    #[error("matrix is not an admissible boundary matrix: {reason}")]
    NotAdmissible { reason: String },

    #[error("matrix is not of generator form [[a, ib], [ic, -conj(a)]]: {reason}")]
    NotGenerator { reason: String },

    #[error("branch n = {n} has the wrong parity for this boundary matrix ({expected} required)")]
    ParityMismatch { n: i64, expected: &'static str },

    #[error("branch m = {m} is only available for multiples of the identity")]
    NonIdentityWithNonzeroM { m: i64 },

    #[error("invalid branch selection: {reason}")]
    InvalidBranch { reason: String },

    #[error("W^A has a pole: cos(nu) + cos(phi) = {value:e}")]
    PoleOfW { value: f64 },

    #[error("tangent pole: argument {arg} is within tolerance of pi/2 + k*pi")]
    PoleOfTan { arg: f64 },

    #[error("operation is not supported for generator class {class}")]
    UnsupportedClass { class: &'static str },

    #[error("denominator {modulus:e} is numerically zero")]
    SingularDenominator { modulus: f64 },

    #[error("spectral point z = {re} + {im}i is too close to the real axis (|Im z| < 1e-3)")]
    InvalidSpectralPoint { re: f64, im: f64 },

    #[error("quadrature grid [{grid_lo}, {grid_hi}] does not cover the support [{lo}, {hi}]")]
    GridMismatch {
        grid_lo: f64,
        grid_hi: f64,
        lo: f64,
        hi: f64,
    },

    #[error("profile integral is {integral}, expected 1")]
    NotNormalized { integral: f64 },

    #[error("nu^2 = {nu_squared} is within {distance:e} of the pole {pole}")]
    NearPole {
        nu_squared: f64,
        pole: f64,
        distance: f64,
    },

    #[error("linear system is numerically singular: {reason}")]
    SingularSystem { reason: String },

    #[error("moment order n = {n} exceeds the supported range n <= 8")]
    Overflow { n: usize },

    #[error("invalid profile: {reason}")]
    InvalidProfile { reason: String },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: String },

    #[error("eigensolver failed: {reason}")]
    Eigen { reason: String },

    #[error("consistency check failed: {reason}")]
    CrossCheck { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
