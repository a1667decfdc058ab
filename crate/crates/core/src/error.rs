use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("data length {len} does not match shape {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("row index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },

    #[error("row {row:?} has squared norm {norm_sq:e}, at or below the zero threshold")]
    ZeroRow { row: Option<usize>, norm_sq: f64 },

    #[error("symmetric eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("k = {k} exceeds the numerical rank {rank}")]
    RankError { k: usize, rank: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("all candidate weights vanished in round {round}")]
    Degenerate { round: usize },

    #[error("enumeration of {count} subsets exceeds the guard of {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("prefix {prefix:?} has zero probability")]
    InfeasiblePrefix { prefix: Vec<usize> },

    #[error("matrix is ill-conditioned (estimated condition number {cond:e})")]
    IllConditioned { cond: f64 },
}
