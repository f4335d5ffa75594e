//! Building blocks that run on the simulated machine: reductions, prefix
//! computation, transpose, rank, compaction, brute-force sorting and random
//! sampling.
//!
//! Every routine takes the machine, the group of cores it may use and its
//! input regions, and returns freshly allocated output regions. Scratch space
//! is released before returning.

mod alloc;
mod brute;
mod compact;
mod error;
mod order;
mod prefix;
mod rank;
mod reduce;
mod rng;
mod sample;
mod seqdist;
mod seqsort;
mod transpose;
pub mod util;

pub use alloc::{allocate_cores, largest_remainder, split_cores};
pub use brute::{brute_sort, brute_sort_into};
pub use compact::{compact, compact_new};
pub use error::{PemError, Result};
pub use order::{less_at, ByKey, KeyOrder, KeysThenSplitters, Natural};
pub use prefix::{prefix_scan, prefix_sum};
pub use rank::rank;
pub use reduce::{par_max, par_min, par_reduce, par_sum};
pub use rng::{PemRng, Stream};
pub use sample::{gather_sorted, oversampling, sample_k_of_n_seq, sample_splitters, splitter_count, SplitterSet};
pub use seqdist::{seq_sort, seq_sort_into};
pub use seqsort::merge_sort_seq;
pub use transpose::{transpose, transpose_into};
