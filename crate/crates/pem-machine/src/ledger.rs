/// Counters for one core.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CoreCounters {
    pub ops: u64,
    pub cache_misses: u64,
    pub block_misses: u64,
}

/// Cost summary of a run. Aggregates are sums over `cores`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub cores: Vec<CoreCounters>,
    pub rounds: u64,
    /// Longest per-core chain of operations, synchronised at barriers.
    pub op_critical_path: u64,
    /// Same chain with every miss weighted by `miss_latency`.
    pub critical_path: u64,
}

impl CostLedger {
    pub fn ops(&self) -> u64 {
        self.cores.iter().map(|c| c.ops).sum()
    }

    pub fn cache_misses(&self) -> u64 {
        self.cores.iter().map(|c| c.cache_misses).sum()
    }

    pub fn block_misses(&self) -> u64 {
        self.cores.iter().map(|c| c.block_misses).sum()
    }

    pub fn misses(&self) -> u64 {
        self.cache_misses() + self.block_misses()
    }

    /// Counters accumulated since `earlier`, a snapshot of the same machine.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        let cores = self
            .cores
            .iter()
            .zip(earlier.cores.iter().chain(std::iter::repeat(&CoreCounters::default())))
            .map(|(now, then)| CoreCounters {
                ops: now.ops - then.ops,
                cache_misses: now.cache_misses - then.cache_misses,
                block_misses: now.block_misses - then.block_misses,
            })
            .collect();
        CostLedger {
            cores,
            rounds: self.rounds - earlier.rounds,
            op_critical_path: self.op_critical_path.saturating_sub(earlier.op_critical_path),
            critical_path: self.critical_path.saturating_sub(earlier.critical_path),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rounds == 0
            && self.op_critical_path == 0
            && self.critical_path == 0
            && self.cores.iter().all(|c| *c == CoreCounters::default())
    }
}
