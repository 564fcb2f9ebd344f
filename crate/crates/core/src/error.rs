//! Error type shared by every module of the crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building or evaluating a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input carried a NaN or infinite component.
    NonFinite,
    /// A vector (or distribution) was expected to be normalized.
    NotNormalized { norm: f64 },
    /// A vector with zero norm cannot be normalized.
    ZeroNorm,
    /// Dimensions of two objects do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Hilbert-space dimension below the supported minimum of 2.
    InvalidDimension { dim: usize },
    /// A matrix failed the Hermiticity check.
    NotHermitian { deviation: f64 },
    /// A matrix failed the unitarity check.
    NotUnitary { deviation: f64 },
    /// The Jacobi sweep failed to converge (should not happen for finite input).
    EigenConvergence,
    /// The path-amplitude sum toward the post-selected state vanishes, so
    /// normalized amplitudes and weak values are undefined.
    DarkFringe,
    /// The operation needs the scenario to post-select on a pure state.
    PostselectionNotPure,
    /// An outcome index does not address a distinct eigenvalue.
    OutcomeIndexOutOfRange { index: usize, len: usize },
    /// Both branches of a conditional probability vanish.
    ZeroDenominator,
    /// A delta-profile pointer has no finite-width wavefunction to evaluate.
    DeltaNotEvaluable,
    /// The distribution integrates to (numerically) zero weight.
    ZeroTotalWeight,
    /// The pointer profile is not supported by this operation.
    ProfileUnsupported { required: &'static str },
    /// Pointer width must be positive.
    InvalidWidth { width: f64 },
    /// Rectangular window narrower than the eigenvalue separation.
    WidthTooSmall { width: f64, needed: f64 },
    /// The supplied normalized amplitudes violate their defining constraints.
    AlphaConstraintViolated { which: &'static str },
    /// A transition matrix element required to be nonzero vanishes.
    VanishingOverlap { index: usize },
    /// No usable reference entry in the normalized-amplitude choice.
    ZeroReferenceAlpha,
    /// A pointer translation would move nonzero amplitude off the grid.
    ShiftOffGrid { cells: i64 },
    /// An eigenvalue shift is not an integer multiple of the grid spacing.
    ShiftNotCommensurate { value: f64, spacing: f64 },
    /// The composite state would exceed the configured resource guard.
    ResourceLimit { needed: usize, limit: usize },
    /// Catch-all for preconditions specific to one operation.
    Unsupported { reason: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => write!(f, "input contains NaN or infinite values"),
            Error::NotNormalized { norm } => {
                write!(f, "vector or distribution not normalized (norm = {norm})")
            }
            Error::ZeroNorm => write!(f, "cannot normalize a zero vector"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidDimension { dim } => {
                write!(f, "dimension {dim} is below the minimum of 2")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (deviation {deviation:.3e})")
            }
            Error::NotUnitary { deviation } => {
                write!(f, "matrix is not unitary (deviation {deviation:.3e})")
            }
            Error::EigenConvergence => write!(f, "eigenvalue iteration did not converge"),
            Error::DarkFringe => write!(
                f,
                "dark fringe: path-amplitude sum vanishes, normalized amplitudes undefined"
            ),
            Error::PostselectionNotPure => {
                write!(f, "operation requires post-selection on a pure state")
            }
            Error::OutcomeIndexOutOfRange { index, len } => {
                write!(f, "outcome index {index} out of range ({len} distinct values)")
            }
            Error::ZeroDenominator => write!(f, "conditional probability denominator vanishes"),
            Error::DeltaNotEvaluable => {
                write!(f, "delta-profile pointer has no evaluable wavefunction")
            }
            Error::ZeroTotalWeight => write!(f, "distribution has zero total weight"),
            Error::ProfileUnsupported { required } => {
                write!(f, "pointer profile unsupported here (requires {required})")
            }
            Error::InvalidWidth { width } => write!(f, "pointer width {width} must be positive"),
            Error::WidthTooSmall { width, needed } => {
                write!(f, "window width {width} must exceed the eigenvalue gap {needed}")
            }
            Error::AlphaConstraintViolated { which } => {
                write!(f, "normalized-amplitude constraint violated: {which}")
            }
            Error::VanishingOverlap { index } => {
                write!(f, "transition overlap with basis state {index} vanishes")
            }
            Error::ZeroReferenceAlpha => {
                write!(f, "all reference amplitudes vanish")
            }
            Error::ShiftOffGrid { cells } => {
                write!(f, "pointer shift of {cells} cells moves amplitude off the grid")
            }
            Error::ShiftNotCommensurate { value, spacing } => {
                write!(f, "shift {value} is not an integer multiple of grid spacing {spacing}")
            }
            Error::ResourceLimit { needed, limit } => {
                write!(f, "composite dimension {needed} exceeds the limit {limit}")
            }
            Error::Unsupported { reason } => write!(f, "{reason}"),
        }
    }
}

impl core::error::Error for Error {}
