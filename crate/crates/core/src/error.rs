use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric: entries ({0},{1}) and ({1},{0}) differ")]
    NotSymmetric(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (witness vector {witness:?})")]
    NotPositiveDefinite { witness: Vec<BigInt> },

    #[error("form is not perfect: rank of minimal-vector projections is {rank} < {full}")]
    NotPerfect { rank: usize, full: usize },

    #[error("cone is not pointed (lineality direction {witness:?})")]
    NotPointed { witness: Vec<BigInt> },

    #[error("cone is not full-dimensional (contained in hyperplane {witness:?})")]
    NotFullDimensional { witness: Vec<BigInt> },

    #[error("index set does not define a face of the cone")]
    NotAFace,

    #[error("ridge index set does not span a codimension-2 face")]
    BadRidge,

    #[error("vector family is rank-deficient (rank {rank} < dim {dim})")]
    RankDeficientFamily { rank: usize, dim: usize },

    #[error("group does not act on the ray set: generator {generator} moves ray {ray} outside")]
    GroupDoesNotAct { generator: usize, ray: usize },

    #[error("not a subgroup: generator {0} of the claimed subgroup is not a member")]
    NotASubgroup(usize),

    #[error("unknown catalog form {0:?}")]
    UnknownCatalogForm(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("flip produced a form that does not share the requested facet")]
    FlipFacetMismatch,

    #[error("state file is invalid: {0}")]
    InvalidState(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
