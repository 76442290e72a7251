//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while validating, decomposing or
/// canonicalizing an operator family.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("operator `{label}` is {rows}x{cols}, expected {n}x{n}")]
    DimensionMismatch {
        label: String,
        rows: usize,
        cols: usize,
        n: usize,
    },

    #[error("non-finite entry at {location}")]
    NonFinite { location: String },

    #[error("duplicate operator label `{0}`")]
    DuplicateLabel(String),

    #[error("operator `{label}` has a nonzero imaginary entry but the family is declared real")]
    ComplexEntryInRealMode { label: String },

    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),

    #[error("basis passed to restrict() is rank deficient")]
    RankDeficientBasis,

    #[error("operators {a} and {b} do not commute (scaled residual {residual:.3e})")]
    CommutationViolation { a: usize, b: usize, residual: f64 },

    #[error("operators {a} and {b} do not anti-commute (scaled residual {residual:.3e})")]
    AntiCommutationViolation { a: usize, b: usize, residual: f64 },

    #[error(
        "operator {operator} is not diagonalizable on an invariant subspace (leak {leak:.3e})"
    )]
    NotDiagonalizable { operator: usize, leak: f64 },

    #[error("operator `{label}` is neither diagonalizable nor square-diagonalizable")]
    UnsupportedOperator { label: String },

    #[error(
        "operator {operator} acts nonzero on a {block_dim}-dimensional subspace where its \
         square vanishes, yet it was classified diagonalizable"
    )]
    InconsistentSpectrum { operator: usize, block_dim: usize },

    #[error("block dimension {dim} is odd; the pair construction needs an even dimension")]
    OddDimension { dim: usize },

    #[error("first operator of the pair is singular on the block")]
    SingularFirstOperator,

    #[error("second operator of the pair is singular on the block; split off its kernel first")]
    SingularSecondOperator,

    #[error("operator {operator} does not square to a constant on the block (deviation {deviation:.3e})")]
    NonConstantSquare { operator: usize, deviation: f64 },

    #[error("operator {operator} squares to ≈ 0 on the block; not a Clifford generator")]
    ZeroSquareConstant { operator: usize },

    #[error(
        "cannot halve a {dim}-dimensional space for {generators} generators; \
         the block is not a valid Clifford representation"
    )]
    DimensionObstruction { dim: usize, generators: usize },

    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("unrecognized format version `{0}`")]
    UnknownFormatVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("linear algebra backend failure: {0}")]
    Backend(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
