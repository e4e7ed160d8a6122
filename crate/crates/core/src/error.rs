use thiserror::Error;

/// Errors raised by parameter validation, the transforms and the bit mappings.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("blocklength {0} is not a power of two")]
    NonPowerOfTwoM(usize),
    #[error("block count {0} is not a power of two")]
    NonPowerOfTwoG(usize),
    #[error("code must have at least one layer")]
    NoLayers,
    #[error("layer {layer} has zero sparsity")]
    ZeroSparsity { layer: usize },
    #[error("layer {layer} has an empty alphabet")]
    EmptyAlphabet { layer: usize },
    #[error("alphabets of layers {first} and {second} share the level {level}")]
    OverlappingAlphabets {
        first: usize,
        second: usize,
        level: f64,
    },
    #[error("layer {layer} lists the level {level} more than once")]
    DuplicateLevel { layer: usize, level: f64 },
    #[error("layer {layer} contains a non-finite level")]
    NonFiniteLevel { layer: usize },
    #[error("total sparsity {total} exceeds blocklength {blocklength}")]
    SparsityExceedsBlocklength { total: usize, blocklength: usize },
    #[error("alphabet of layer {layer} contains zero")]
    ZeroInAlphabet { layer: usize },
    #[error("binomial or power overflow while counting bits ({0})")]
    CountOverflow(String),
    #[error("CRC width {width} invalid for a {budget}-bit code (need 1..=min(64, budget))")]
    InvalidCrcWidth { width: u32, budget: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("block index {index} out of range for {blocks} blocks")]
    BlockIndexOutOfRange { index: usize, blocks: usize },
    #[error("index {0} is not in the candidate set")]
    ElementNotInCandidateSet(usize),
    #[error("rank {rank} out of range for C({n}, {k})")]
    RankOutOfRange { rank: u128, n: usize, k: usize },
    #[error("level {0} is not in the layer alphabet")]
    LevelNotInAlphabet(f64),
    #[error("configuration is not eligible for ordered-statistics decoding: {0}")]
    ConfigNotOSEligible(String),
    #[error("list decoding needs {expected} per-layer list sizes, got {actual}")]
    ListConfig { expected: usize, actual: usize },
    #[error("permutation generation failed to find {0} distinct permutations")]
    PermutationExhausted(usize),
    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {error:e})")]
    NonConvergence { tolerance: f64, error: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
