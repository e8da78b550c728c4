use thiserror::Error;

use crate::paircorr::CorrelationKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("x has {x_rows} rows but y has {y_rows}")]
    RowCountMismatch { x_rows: usize, y_rows: usize },
    #[error("need at least {min} observations, got {got}")]
    TooFewRows { min: usize, got: usize },
    #[error("{side} has no columns")]
    NoColumns { side: &'static str },
    #[error("non-finite value in {side} at row {row}, column {col}")]
    NonFiniteInput {
        side: &'static str,
        row: usize,
        col: usize,
    },
    #[error("tied values in {side} column {col}")]
    TiesPresent { side: &'static str, col: usize },
    #[error("input is not a permutation of 1..={n}")]
    NotAPermutation { n: usize },
    #[error("rank vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("kernel of arity {arity} needs at least {arity} observations, got {n}")]
    SampleSmallerThanArity { arity: usize, n: usize },
    #[error("kernel expects {expected} points, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("tied coordinates on axis {axis}")]
    TiedCoordinates { axis: usize },
    #[error("brute-force enumeration is capped at n = {max}, got {n}")]
    SampleTooLarge { n: usize, max: usize },
    #[error("{kind} null moments need n >= {min}, got {n}")]
    SampleTooSmall {
        kind: CorrelationKind,
        n: usize,
        min: usize,
    },
    #[error("statistic matrix is empty")]
    EmptyMatrix,
    #[error("moments are for {moments} but the matrix holds {matrix}")]
    KindMismatch {
        matrix: CorrelationKind,
        moments: CorrelationKind,
    },
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("permutation plan needs at least 2 draws, got {0}")]
    TooFewPermutations(usize),
    #[error("all {0} permuted sum statistics are equal; the variance estimate is zero")]
    DegenerateVariance(usize),
    #[error("permutation standard deviation is zero")]
    ZeroSigma,
    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid test specification: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("setting {0} is not valid for this generator")]
    BadLabel(String),
    #[error("dimension too small: {0}")]
    DimensionTooSmall(String),
    #[error("subsample size {n_prime} exceeds sample size {n}")]
    SubsampleTooLarge { n_prime: usize, n: usize },
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by the numbers rather than the shape of the input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::DegenerateVariance(_) | Error::ZeroSigma => true,
            Error::Pair { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
