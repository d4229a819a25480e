use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed spec document: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("need n > m, got m = {m}, n = {n}")]
    NotWide { m: usize, n: usize },

    #[error("constraint matrix has rank {rank} < m = {m}")]
    RankDeficient { rank: usize, m: usize },

    #[error("infeasible margins: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the dual domain: theta[{column}] = {theta} <= 0")]
    DualDomain { column: usize, theta: f64 },

    #[error("no admissible initial multiplier found after {attempts} attempts; supply init_lambda")]
    NoInitialPoint { attempts: usize },

    #[error("solver did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Hessian is not positive definite; the constraint matrix is numerically rank deficient")]
    SingularHessian,

    #[error("column {0} is zero")]
    ZeroColumn(usize),

    #[error("the constraint matrix must have integer entries")]
    NonIntegral,

    #[error("columns are not cyclic: {0}")]
    NotCyclic(String),

    #[error("vacuous bound: {0}")]
    Vacuous(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("state budget exceeded: {0}")]
    BudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
