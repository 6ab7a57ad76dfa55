use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which side of a bipartite/directed adjacency an index refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

/// A single broken invariant of a membership matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MembershipViolation {
    NonFinite { row: usize, col: usize },
    NegativeEntry { row: usize, col: usize, value: f64 },
    EntryAboveOne { row: usize, col: usize, value: f64 },
    RowSumMismatch { row: usize, sum: f64 },
    Shape { n: usize, k: usize },
}

impl fmt::Display for MembershipViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonFinite { row, col } => write!(f, "non-finite entry at ({row}, {col})"),
            Self::NegativeEntry { row, col, value } => {
                write!(f, "negative entry {value} at ({row}, {col})")
            }
            Self::EntryAboveOne { row, col, value } => {
                write!(f, "entry {value} above one at ({row}, {col})")
            }
            Self::RowSumMismatch { row, sum } => write!(f, "row {row} sums to {sum}"),
            Self::Shape { n, k } => write!(f, "need k >= 1 and n >= k, got n={n}, k={k}"),
        }
    }
}

fn join_violations(v: &[MembershipViolation]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, item) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{item}");
    }
    out
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid membership matrix: {}", join_violations(.0))]
    InvalidMembership(Vec<MembershipViolation>),

    #[error("probability {value} at ({row}, {col}) is outside [0, 1]")]
    ProbabilityOutOfRange { row: usize, col: usize, value: f64 },

    #[error("invalid probability matrix: {0}")]
    InvalidProbabilityMatrix(String),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("edge ({row}, {col}) out of range for a {n_rows}x{n_cols} adjacency")]
    EdgeOutOfRange { row: usize, col: usize, n_rows: usize, n_cols: usize },

    #[error("every node was removed from the sampled network")]
    AllNodesRemoved,

    #[error("node counts do not add up: expected {expected}, found {found}")]
    CountMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iterative SVD did not converge within {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("matrix is rank deficient for k={k}: sigma_k={sigma_k:e}, sigma_1={sigma_1:e}")]
    RankDeficient { k: usize, sigma_k: f64, sigma_1: f64 },

    #[error("successive projection residual vanished after {picked} of {k} picks")]
    RankCollapse { picked: usize, k: usize },

    #[error("{axis} node {index} ({label}) has zero degree; run degree preprocessing first")]
    ZeroDegreeNode { axis: Axis, index: usize, label: String },

    #[error("corner Gram matrix is singular (condition number {condition:e})")]
    SingularCornerMatrix { condition: f64 },

    #[error("adjacency is not square with aligned row/column labels")]
    NotSquare,

    #[error("row and column label sets do not intersect")]
    EmptyIntersection,
}
