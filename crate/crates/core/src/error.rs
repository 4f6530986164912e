use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid cyclic order {0}: orders must be at least 1")]
    InvalidOrder(i64),

    #[error("{what} of size {size} exceeds the enumeration bound {bound}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a homomorphism: generator {generator} has order {order} but its image {image} does not vanish under it")]
    NotAHomomorphism {
        generator: usize,
        order: u64,
        image: String,
    },

    #[error("map is not an automorphism (kernel contains {0})")]
    NotAnAutomorphism(String),

    #[error("element set is not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid gaussian parameters: {0}")]
    InvalidGaussian(String),
}
