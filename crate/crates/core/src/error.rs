use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter ordering violated: {0}")]
    ParameterOrdering(String),
    #[error("regularizer rates b{i} = {bi} and b{j} = {bj} coincide")]
    DegenerateRates { i: usize, j: usize, bi: f64, bj: f64 },
    #[error("Wronskian is numerically singular at r = {r} (relative size {relative:e})")]
    SingularWronskian { r: f64, relative: f64 },
    #[error("momentum {k} coincides with a pole of the Jost function")]
    PoleOfJost { k: Complex64 },
    #[error("wavefunction has a node at the matching radius (k = {k}); perturb k")]
    NodeAtMatching { k: Complex64 },
    #[error("pole condition unresolvable in double precision at k = {k} (noise floor {floor:e})")]
    Unresolvable { k: Complex64, floor: f64 },
    #[error("ODE integrator failed at r = {r}: {reason}")]
    IntegratorFailure { r: f64, reason: String },
    #[error("search region is empty or invalid: {0}")]
    EmptyRegion(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("radius {radius} is not a multiple of the lattice constant {a}")]
    MisalignedRadius { radius: f64, a: f64 },
    #[error("tridiagonal system is singular at E = {energy}")]
    SingularSystem { energy: Complex64 },
    #[error("eigenvectors lose biorthogonality (defect {defect:e}); close to an exceptional point")]
    DefectiveSpectrum { defect: f64 },
    #[error("grid too coarse: {coarse} poles on the base grid, {fine} on the doubled grid")]
    GridTooCoarse { coarse: usize, fine: usize },
    #[error("eigenvalue branch lost: overlap {overlap:.3} below 0.5")]
    BranchLoss { overlap: f64 },
    #[error("sweep does not cover the stability window [{lo}, {hi}]")]
    WindowUncovered { lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
