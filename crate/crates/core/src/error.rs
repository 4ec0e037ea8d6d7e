use thiserror::Error;

use crate::gf2::Gf2Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("not a chain map: {0}")]
    NotAChainMap(String),
    #[error("not an involution: {0}")]
    NotAnInvolution(String),
    #[error("involution is not free: {0}")]
    NonFreeAction(String),
    #[error("grading misalignment: {0}")]
    GradingMisalignment(String),
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("identity violated: {0}")]
    IdentityViolation(String),
    #[error("exact triangle check failed: {0}")]
    Triangle(String),
    #[error("composition mismatch: {0}")]
    Mismatch(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("integration unstable: norm drift {drift:e} exceeds 1e-6")]
    StepInstability { drift: f64 },
    #[error("sample {sample} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { sample: usize, deviation: f64 },
    #[error("path endpoint at t = {t} has an eigenvalue {eigenvalue:e} within tolerance of zero")]
    NearKernelEndpoint { t: f64, eigenvalue: f64 },
    #[error("cannot resolve eigenvalue crossing near t = {t}")]
    CrossingAmbiguity { t: f64 },
    #[error("path is not closed")]
    NotClosed,
    #[error("closed path has nonzero spectral flow {0}")]
    NontrivialLoopFlow(i64),
    #[error("parity violation: {0}")]
    Parity(String),
    #[error("quadratic form is not negative definite: {0}")]
    NotNegativeDefinite(String),
    #[error("search box of radius {radius} is insufficient (certified radius {needed})")]
    InsufficientBox { radius: i64, needed: i64 },
    #[error("not a tower: {0}")]
    NotATower(String),
    #[error("tower decomposition failed: {0}")]
    Decomposition(String),
    #[error("ordering violation: {0}")]
    Ordering(String),
    #[error("beta(-Y) = {beta_neg_y} is not -beta(Y) = {}", -beta_y)]
    Antisymmetry { beta_y: i64, beta_neg_y: i64 },
    #[error("invalid input: {0}")]
    Input(String),
}
