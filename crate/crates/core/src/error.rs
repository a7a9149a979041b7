use thiserror::Error;

/// Errors raised by construction and by the projection / derivative routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure space needs at least one atom")]
    NoAtoms,
    #[error("atom {index} has non-positive or non-finite weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("exponent {name} = {value} must lie strictly inside (1, inf)")]
    BadExponent { name: &'static str, value: f64 },
    #[error("vector dimension must be at least 1")]
    ZeroDimension,
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("operands live in different spaces")]
    SpaceMismatch,
    #[error("support set must contain at least one atom")]
    EmptySupport,
    #[error("atom index {index} out of range for {atoms} atoms")]
    AtomIndex { index: usize, atoms: usize },
    #[error("support blocks {0} and {1} overlap")]
    OverlappingBlocks(usize, usize),
    #[error("blocks do not cover atom {0}")]
    IncompleteCover(usize),
    #[error("{vectors} vectors supplied for {blocks} blocks")]
    BlockCount { blocks: usize, vectors: usize },
    #[error("direction must be non-zero")]
    ZeroDirection,
    #[error("element must be non-zero")]
    ZeroElement,
    #[error("element is not supported in the given set")]
    NotSupported,
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("operation requires p = rho = 2 (got p = {p}, rho = {rho})")]
    NotHilbert { p: f64, rho: f64 },
    #[error("oracle did not converge within {iterations} iterations")]
    OracleDidNotConverge { iterations: usize },
    #[error("oracle limited to n*d <= {limit} unknowns, got {got}")]
    OracleTooLarge { limit: usize, got: usize },
    #[error("invalid oracle configuration: {0}")]
    BadOracleConfig(&'static str),
    #[error("invalid step schedule: {0}")]
    BadSchedule(&'static str),
    #[error("projector left the region of its base point at step {step}")]
    NotCovered { step: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
