use thiserror::Error;

use crate::hw::Bipartition;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Heisenberg-Weyl label {0} out of range 0..=8")]
    LabelOutOfRange(i64),

    #[error("MUB index {0} out of range 1..=4")]
    MubOutOfRange(u8),

    #[error("multi-index must contain at least one site")]
    EmptyMultiIndex,

    #[error("length mismatch: {left} sites vs {right} sites")]
    LengthMismatch { left: usize, right: usize },

    #[error("{sites} sites exceeds the dense-matrix guard of {limit}")]
    DimensionGuard { sites: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bipartition must split the sites into two nonempty sides")]
    TrivialCut,

    #[error("site {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("incomplete tomography data: {0}")]
    IncompleteData(String),

    #[error("simplex dimension must be at least 2, got {0}")]
    SimplexDimension(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("operator {0} appears twice")]
    DuplicateOperator(String),

    #[error("operators {0} and {1} commute")]
    CommutingPair(String, String),

    #[error("search aborted after exceeding {limit} partial sets")]
    SearchGuard { limit: u64 },

    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),

    #[error("criteria leave cut {0} uncovered")]
    CoverageGap(Bipartition),

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
