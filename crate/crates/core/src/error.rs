//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid linked subgraph: {0}")]
    InvalidSubgraph(String),

    /// The union of chain relations orders two elements both ways.
    #[error("contradictory order restriction: elements {a} and {b} are ordered both ways")]
    Cycle { a: usize, b: usize },

    /// A chain is implied by another chain and therefore not maximal.
    #[error("chain {subsumed:?} is implied by chain {by:?}, so the subgraph set is not maximal")]
    SubsumedChain { subsumed: Vec<usize>, by: Vec<usize> },

    #[error("weights must be strictly positive and finite, got {value} at index {index}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("values must be finite, got {value} at index {index}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// No element of the component is linked to every other element.
    #[error(
        "component {component:?} has no nodal parameter; estimation under such \
         restrictions is not supported"
    )]
    NoNodalParameter { component: Vec<usize> },

    #[error("unsupported restriction: {0}")]
    UnsupportedRestriction(String),

    #[error(
        "pooled smoothing requires equal group sizes, got {sizes:?}; \
         pool per test with a common n instead"
    )]
    UnequalGroupSizes { sizes: Vec<u64> },

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("empty subject pool")]
    EmptyPool,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
