use thiserror::Error;

use crate::io_sim::FileId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("not a permutation of 1..={n}: {reason}")]
    NotAPermutation { n: usize, reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("block width must be at least 1")]
    ZeroBlockWidth,

    #[error("enumeration limit: n = {n} exceeds {limit}")]
    EnumerationLimit { n: usize, limit: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown file {0}")]
    UnknownFile(FileId),

    #[error("block {index} out of range for file {file} ({len} blocks)")]
    BlockOutOfRange {
        file: FileId,
        index: usize,
        len: usize,
    },

    #[error("block of {len} keys exceeds block width {b}")]
    BlockTooLarge { len: usize, b: usize },

    #[error("cannot write an empty block")]
    EmptyBlock,

    #[error("file {0} already ends with a partial block")]
    PartialBlockNotFinal(FileId),

    #[error("memory budget exceeded: {requested} more items with {resident}/{capacity} resident")]
    MemoryBudgetExceeded {
        requested: usize,
        resident: usize,
        capacity: usize,
    },

    #[error("workspace underflow: releasing {requested} items with {resident} resident")]
    WorkspaceUnderflow { requested: usize, resident: usize },

    #[error("sample too small: {sample} keys for {buckets} buckets")]
    SampleTooSmall { sample: usize, buckets: usize },

    #[error("t must be even (got {0})")]
    OddIoCount(u64),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("cost model degenerate: {0}")]
    CostModelDegenerate(String),

    #[error("sorted relation is not sorted at block {block}")]
    UnsortedRelation { block: usize },

    #[error("corrupt image: {0}")]
    CorruptImage(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
