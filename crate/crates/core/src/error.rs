use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ground sets differ")]
    GroundMismatch,
    #[error("ground set too large: {0} elements (max 16)")]
    GroundTooLarge(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("J1 is not contained in J2")]
    InvalidNesting,
    #[error("ranges differ: {0} vs {1}")]
    RangeMismatch(String, String),
    #[error("not an adjoint pair: {0}")]
    NotAdjoint(String),
    #[error("too large for factorial vertex enumeration: {0} elements")]
    TooLarge(usize),
    #[error("coefficient must be positive")]
    NonPositiveCoefficient,
    #[error("point references unknown edge {0}")]
    ForeignPoint(String),
    #[error("divisor is not admissible")]
    NotAdmissible,
    #[error("cut is empty")]
    EmptyCut,
    #[error("distance {0} exceeds ml = {1}")]
    DistanceTooLarge(String, String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("degree {0} does not match level {1}")]
    DegreeMismatch(String, String),
    #[error("point is not in the image of the Laplacian")]
    NoPreimage,
    #[error("face is not a facet")]
    NotFacet,
    #[error("seed degree {0} is outside the window level range")]
    SeedDegreeOutsideWindowLevel(String),
    #[error("adjacency graph is not connected")]
    NotConnectedAdjacency,
    #[error("basis rows are linearly dependent")]
    RankDeficientBasis,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point is not in the simplex")]
    NotInSimplex,
    #[error("pair is not integral")]
    NonIntegralPair,
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("reduction did not finish within {0} moves")]
    StepLimit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
