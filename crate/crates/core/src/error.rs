use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square with n >= 2 (got {rows}x{cols})")]
    BadShape { rows: usize, cols: usize },

    #[error("entry p[{row}][{col}] = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum} (deviation {deviation:e} exceeds tolerance)")]
    RowSumViolation { row: usize, sum: f64, deviation: f64 },

    #[error("chain is not irreducible (node {node} cannot reach or be reached from node 0)")]
    NotIrreducible { node: usize },

    #[error("chain is periodic with period {period}")]
    NotAperiodic { period: usize },

    #[error("chain is not reversible (detailed-balance residual {residual:e})")]
    NotReversible { residual: f64 },

    #[error("marked node {index} out of range for n = {n}")]
    MarkedOutOfRange { index: usize, n: usize },

    #[error("stationary solve did not converge (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },

    #[error("interpolation parameter s = {0} outside [0, 1)")]
    SRange(f64),

    #[error("marked set is empty")]
    EmptyMarkedSet,

    #[error("every node is marked; there is no unmarked start distribution")]
    EmptyUnmarkedSet,

    #[error("eigensolver failure: {0}")]
    EigensolveFailure(String),

    #[error("denominator 1 - lambda = {0:e} too close to zero")]
    DegenerateDenominator(f64),

    #[error("hitting-time identity violated: relative deviation {0:e}")]
    IdentityViolation(f64),

    #[error("dense edge-space operators are limited to n <= {limit} (got n = {n})")]
    TooLargeForDense { n: usize, limit: usize },

    #[error("unitary completion failed for node {0}")]
    CompletionFailure(usize),

    #[error("discriminant eigenvalue lambda_{index} = {value} is degenerate with the top eigenvalue")]
    DegenerateTopEigenvalue { index: usize, value: f64 },

    #[error("edge locality violated: {0}")]
    LocalityViolation(String),

    #[error("the edge-walk search supports exactly one marked node (got {0})")]
    UnsupportedMultiMarked(usize),

    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("bisection failed: {0}")]
    BisectionFailure(String),

    #[error("marked stationary mass p_M = {0} outside (0, 1/2]")]
    PMRange(f64),

    #[error("precision epsilon = {0} outside (0, 1/4)")]
    EpsilonRange(f64),

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("adjacency matrix is disconnected")]
    Disconnected,

    #[error("adjacency entry a[{row}][{col}] = {value} is negative")]
    NegativeWeight { row: usize, col: usize, value: f64 },

    #[error("scaling fit needs at least 3 points (got {0})")]
    InsufficientData(usize),

    #[error("scaling fit requires positive values (got {0})")]
    NonPositiveValue(f64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for invalid input, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure { .. }
            | Error::EigensolveFailure(_)
            | Error::DegenerateDenominator(_)
            | Error::IdentityViolation(_)
            | Error::CompletionFailure(_)
            | Error::DegenerateTopEigenvalue { .. }
            | Error::LocalityViolation(_)
            | Error::BisectionFailure(_) => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_input_from_numerics() {
        assert_eq!(Error::EpsilonRange(0.3).exit_code(), 2);
        assert_eq!(Error::NotReversible { residual: 1.0 }.exit_code(), 2);
        assert_eq!(Error::ConvergenceFailure { residual: 1.0 }.exit_code(), 3);
        assert_eq!(Error::BisectionFailure("x".into()).exit_code(), 3);
    }
}
