//! External approximate sorting under the block I/O model, with distortion
//! metrics, analytical bounds, a Bloom-filter bucket index and join
//! algorithms over approximately sorted relations.

pub mod amj;
pub mod bloom;
pub mod bounds;
pub mod easort;
pub mod error;
pub mod io_sim;
pub mod perm;
pub mod vbf;

pub use amj::{
    approx_sort_relation, classic_merge_join, is_m_tolerable, join_asr_asr, join_asr_sr, pack_tuple, predicted_join_cost,
    tuple_id, tuple_key, JoinResult, JoinShape, JoinStrategy,
};
pub use bloom::BloomFilter;
pub use bounds::BoundsRow;
pub use easort::{easort, easort_by, materialize, ApproxRun, BucketDescriptor, EasortConfig};
pub use error::{Error, Result};
pub use io_sim::{BlockStore, FileId, IoParams, IoStats, StoreImage, Workspace};
pub use perm::{BlockWidth, MetricKind, Permutation};
pub use vbf::{cost_model, CostModel, CostParams, VbfTree};
