//! Deterministic simulator of a private-cache multicore.
//!
//! `p` cores each own a fully associative LRU cache of `M / B` blocks over a
//! shared, zero-initialised, word-addressed memory split into `B`-word
//! blocks. Every access is charged: a cache miss when the block is not
//! resident, and block misses when cores touch one block in the same round
//! with at least one writer (the i-th of k writers pays i - 1; every pure
//! reader pays 1). Written blocks are invalidated in all other caches when
//! the round closes.

mod cache;
mod config;
mod cores;
mod ledger;
mod machine;
mod trace;

pub use config::{MachineConfig, Scenario, MAX_CORES};
pub use cores::{chunk_ranges, Cores};
pub use ledger::{CoreCounters, CostLedger};
pub use machine::{Diagnostic, DiagnosticKind, Machine, MemRegion};
pub use trace::{write_trace_csv, MissKind, TraceEvent, TraceOp};

/// One simulated memory word: a key, a coordinate handle, a count.
pub type Word = i64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("address {addr} is outside allocated memory ({len} words)")]
    OutOfBounds { addr: usize, len: usize },
    #[error("index {index} is outside a region of {len} words")]
    OutOfRegion { index: usize, len: usize },
    #[error("core {core} does not exist (p = {p})")]
    InvalidCore { core: usize, p: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
}
