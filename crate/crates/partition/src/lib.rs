//! Distributing keys into buckets delimited by sorted splitters.
//!
//! With splitters `s_0 <= ... <= s_{z-1}`, key `k` lands in bucket `i` when
//! `s_{i-1} < k <= s_i`, taking `s_{-1} = -inf` and `s_z = +inf`. There are
//! always `z + 1` buckets; the last one holds the keys above every splitter
//! and is empty when the largest splitter bounds the input.

mod recursive;
mod search;
mod seq;
mod small;

pub use recursive::{partition_main, partition_main_unchecked, PartitionTask, SEQ_FLOOR};
pub use search::multisearch;
pub use seq::partition_seq;
pub use small::{partition_quadratic, partition_sqrt};

pub use pem_merge::BucketedRun;
