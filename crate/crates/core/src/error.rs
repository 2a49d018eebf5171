use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NonHermitian { max_asymmetry: f64 },

    #[error("point matrix is not invertible (det = {det})")]
    SingularPoint { det: Complex64 },

    #[error("expected a {expected} vector, got {found}")]
    WrongTag {
        expected: &'static str,
        found: &'static str,
    },

    #[error("{what} is not a point of {space} (residual {residual:.3e})")]
    NotOnSpace {
        what: &'static str,
        space: &'static str,
        residual: f64,
    },

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("evaluation error at z = {z}: {msg}")]
    Eval { z: Complex64, msg: String },

    #[error("integration step underflow near z = {z}")]
    StepUnderflow { z: Complex64 },

    #[error("path leaves the domain at z = {z}")]
    OutsideDomain { z: Complex64 },

    #[error("frame determinant drifted by {drift:.3e} at z = {z}")]
    DeterminantDrift { z: Complex64, drift: f64 },

    #[error("branch of sqrt(alpha*beta) jumped by {jump:.3} rad at z = {z}; reduce the step")]
    BranchJump { z: Complex64, jump: f64 },

    #[error("degenerate data: identifier vanishes identically")]
    IdentifierVanishes,

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("point z = {z} is not on the singular set (|lambda| = {lambda:.3e})")]
    NotSingular { z: Complex64, lambda: f64 },

    #[error("not enough neighbouring samples around index {index}")]
    InsufficientSamples { index: usize },

    #[error("curve mixes singularity types; offending sample indices {indices:?}")]
    MixedClassification { indices: Vec<usize> },

    #[error("signature error: {what} has <v,v> = {value:.3e}, expected spacelike")]
    Signature { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn eval(z: Complex64, msg: impl Into<String>) -> Self {
        Error::Eval { z, msg: msg.into() }
    }
}
