use thiserror::Error;

/// Errors raised by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("matrix is singular (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("isometry is the identity")]
    Identity,
    #[error("isometry is parabolic")]
    Parabolic,
    #[error("isometry is elliptic")]
    Elliptic,
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("geodesics share an endpoint")]
    SharedEndpoint,
    #[error("rotation angle must be real, got imaginary part {0}")]
    NonRealAngle(f64),
    #[error("cycle holonomy is not loxodromic")]
    NotClosable,
    #[error("cycle is not continuous: {0}")]
    NotContinuous(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("detour of zero complex length")]
    ZeroDetour,
    #[error("branch ambiguity: sinh factor {0:e} too small")]
    BranchAmbiguity(f64),
    #[error("cuff half-lengths do not match")]
    CuffMismatch,
    #[error("foot count must be even for tau-symmetric sampling, got {0}")]
    OddCount(usize),
    #[error("no perfect matching on curve {curve}: deficient set {witness:?}")]
    Infeasible { curve: usize, witness: Vec<usize> },
    #[error("lattice search exhausted without a fit")]
    SearchExhausted,
    #[error("neighbourhood exceeds half the torsor area")]
    NotApplicable,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sequence is not semi-linear: {0}")]
    NotSemiLinear(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("quadruple has repeated points")]
    DegenerateQuadruple,
}

pub type Result<T> = std::result::Result<T, GeomError>;
