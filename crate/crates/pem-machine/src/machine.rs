//! The simulator proper.
//!
//! Time is kept per core. A barrier over a group of cores ends the group's
//! current round: same-round block conflicts are charged, copies of written
//! blocks are invalidated, and the group's clocks are synchronised to the
//! slowest member. Disjoint groups advance independently, so recursive
//! sub-problems on separate groups overlap in simulated time even though the
//! host runs them one after another.

use crate::cache::{CoreCache, Touch};
use crate::cores::Cores;
use crate::ledger::{CoreCounters, CostLedger};
use crate::trace::{MissKind, TraceEvent, TraceOp};
use crate::{MachineConfig, MachineError, Word};

const MAX_STORED_DIAGNOSTICS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Same-round access pattern outside the write/read conflict rules.
    Race,
    /// An algorithm precondition did not hold below the root call.
    Precondition,
    /// An algorithm fell back to a slower path.
    Fallback,
    Note,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub round: u64,
    pub message: String,
}

/// A word-addressed span of shared memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MemRegion {
    pub base: usize,
    pub len: usize,
}

impl MemRegion {
    pub fn new(base: usize, len: usize) -> Self {
        MemRegion { base, len }
    }

    pub fn addr(&self, i: usize) -> usize {
        self.base + i
    }

    pub fn end(&self) -> usize {
        self.base + self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sub-region `[off, off + len)`.
    pub fn slice(&self, off: usize, len: usize) -> MemRegion {
        assert!(off + len <= self.len, "slice {off}+{len} outside region of {}", self.len);
        MemRegion::new(self.base + off, len)
    }

    /// Indices of the aligned `b`-word blocks covering the region.
    pub fn blocks(&self, b: usize) -> std::ops::Range<usize> {
        if self.len == 0 {
            return 0..0;
        }
        self.base / b..(self.end() - 1) / b + 1
    }
}

#[derive(Clone, Copy, Default)]
struct WordMeta {
    w_epoch: u32,
    r_epoch: u32,
    w_core: u8,
    r_core: u8,
}

#[derive(Clone, Copy, Default)]
struct BlockMeta {
    epoch: u32,
    writers: u128,
    readers: u128,
    holders: u128,
}

pub struct Machine {
    cfg: MachineConfig,
    mem: Vec<Word>,
    words: Vec<WordMeta>,
    blocks: Vec<BlockMeta>,
    top: usize,
    caches: Vec<CoreCache>,
    epoch: Vec<u32>,
    next_epoch: u32,
    dirty: Vec<usize>,
    busy: Vec<bool>,
    ops_clock: Vec<u64>,
    cost_clock: Vec<u64>,
    counters: Vec<CoreCounters>,
    rounds: u64,
    diagnostics: Vec<Diagnostic>,
    race_count: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl Machine {
    pub fn new(cfg: MachineConfig) -> Result<Self, MachineError> {
        cfg.validate()?;
        let p = cfg.p;
        Ok(Machine {
            caches: (0..p).map(|_| CoreCache::new(cfg.cache_blocks())).collect(),
            epoch: vec![1; p],
            next_epoch: 2,
            mem: Vec::new(),
            words: Vec::new(),
            blocks: Vec::new(),
            top: 0,
            dirty: Vec::new(),
            busy: vec![false; p],
            ops_clock: vec![0; p],
            cost_clock: vec![0; p],
            counters: vec![CoreCounters::default(); p],
            rounds: 0,
            diagnostics: Vec::new(),
            race_count: 0,
            trace: None,
            cfg,
        })
    }

    pub fn config(&self) -> &MachineConfig {
        &self.cfg
    }

    pub fn p(&self) -> usize {
        self.cfg.p
    }

    pub fn all_cores(&self) -> Cores {
        Cores::all(self.cfg.p)
    }

    // ---- memory management -------------------------------------------------

    /// Allocates a zeroed, block-aligned region.
    pub fn alloc(&mut self, len: usize) -> MemRegion {
        let b = self.cfg.b;
        let base = self.top.div_ceil(b) * b;
        let end = base + len;
        if end > self.mem.len() {
            let cap = end.div_ceil(b) * b;
            self.mem.resize(cap, 0);
            self.words.resize(cap, WordMeta::default());
            self.blocks.resize(cap / b, BlockMeta::default());
        }
        self.mem[base..end].fill(0);
        self.words[base..end].fill(WordMeta::default());
        self.top = end;
        MemRegion::new(base, len)
    }

    /// Current allocation watermark, for use with [`Machine::release`].
    pub fn mark(&self) -> usize {
        self.top
    }

    /// Frees every region allocated after `mark` was taken.
    pub fn release(&mut self, mark: usize) {
        debug_assert!(mark <= self.top);
        self.top = mark;
    }

    /// Copies host data into a region without charging anything.
    pub fn load(&mut self, region: MemRegion, data: &[Word]) {
        assert!(data.len() <= region.len);
        self.mem[region.base..region.base + data.len()].copy_from_slice(data);
    }

    /// Allocates a region holding `data`, free of charge.
    pub fn alloc_from(&mut self, data: &[Word]) -> MemRegion {
        let r = self.alloc(data.len());
        self.load(r, data);
        r
    }

    /// Reads a region without charging anything.
    pub fn snapshot_memory(&self, region: MemRegion) -> Result<Vec<Word>, MachineError> {
        if region.end() > self.top {
            return Err(MachineError::OutOfBounds { addr: region.end().saturating_sub(1), len: self.top });
        }
        Ok(self.mem[region.base..region.end()].to_vec())
    }

    // ---- charged accesses -----------------------------------------------------

    pub fn read(&mut self, core: usize, addr: usize) -> Result<Word, MachineError> {
        self.access(core, addr, false)?;
        Ok(self.mem[addr])
    }

    pub fn write(&mut self, core: usize, addr: usize, value: Word) -> Result<(), MachineError> {
        self.access(core, addr, true)?;
        self.mem[addr] = value;
        Ok(())
    }

    /// Reads element `i` of `region`.
    pub fn rd(&mut self, core: usize, region: MemRegion, i: usize) -> Result<Word, MachineError> {
        if i >= region.len {
            return Err(MachineError::OutOfRegion { index: i, len: region.len });
        }
        self.read(core, region.base + i)
    }

    /// Writes element `i` of `region`.
    pub fn wr(&mut self, core: usize, region: MemRegion, i: usize, v: Word) -> Result<(), MachineError> {
        if i >= region.len {
            return Err(MachineError::OutOfRegion { index: i, len: region.len });
        }
        self.write(core, region.base + i, v)
    }

    /// Charges `k` register-only operations to `core`.
    pub fn work(&mut self, core: usize, k: u64) {
        debug_assert!(core < self.cfg.p);
        self.counters[core].ops += k;
        self.ops_clock[core] += k;
        self.cost_clock[core] += k;
        if k > 0 {
            self.busy[core] = true;
        }
    }

    fn access(&mut self, core: usize, addr: usize, write: bool) -> Result<(), MachineError> {
        if core >= self.cfg.p {
            return Err(MachineError::InvalidCore { core, p: self.cfg.p });
        }
        if addr >= self.top {
            return Err(MachineError::OutOfBounds { addr, len: self.top });
        }
        let blk = addr / self.cfg.b;
        let bit = 1u128 << core;
        self.counters[core].ops += 1;
        self.ops_clock[core] += 1;
        self.cost_clock[core] += 1;
        self.busy[core] = true;

        let mut kind = MissKind::None;
        if let Touch::Miss { evicted } = self.caches[core].touch(blk as u64) {
            kind = MissKind::Cache;
            self.counters[core].cache_misses += 1;
            self.cost_clock[core] += self.cfg.miss_latency;
            self.blocks[blk].holders |= bit;
            if let Some(e) = evicted {
                self.blocks[e as usize].holders &= !bit;
            }
        }

        let ep = self.epoch[core];
        if self.blocks[blk].epoch != ep {
            let meta = self.blocks[blk];
            if meta.writers | meta.readers != 0 {
                // Pending conflicts of a round that is still open elsewhere.
                self.settle(blk);
            }
            let meta = &mut self.blocks[blk];
            meta.epoch = ep;
            meta.writers = 0;
            meta.readers = 0;
            self.dirty.push(blk);
        }
        if write {
            self.blocks[blk].writers |= bit;
        } else {
            self.blocks[blk].readers |= bit;
        }

        let wm = self.words[addr];
        if write {
            if wm.w_epoch == ep && wm.w_core as usize != core {
                self.race(format!("cores {} and {core} both wrote word {addr} in one round", wm.w_core));
            } else if wm.r_epoch == ep && wm.r_core as usize != core {
                self.race(format!("core {core} wrote word {addr} read by core {} in the same round", wm.r_core));
            }
            let m = &mut self.words[addr];
            m.w_epoch = ep;
            m.w_core = core as u8;
        } else {
            if wm.w_epoch == ep && wm.w_core as usize != core {
                self.race(format!("core {core} read word {addr} written by core {} in the same round", wm.w_core));
            }
            let m = &mut self.words[addr];
            m.r_epoch = ep;
            m.r_core = core as u8;
        }

        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEvent {
                round: self.rounds,
                core,
                op: if write { TraceOp::Write } else { TraceOp::Read },
                addr,
                miss_kind: kind,
            });
        }
        Ok(())
    }

    fn race(&mut self, message: String) {
        self.race_count += 1;
        self.diagnose(DiagnosticKind::Race, message);
    }

    /// Applies the same-round conflict charges for one block and clears them.
    fn settle(&mut self, blk: usize) {
        let meta = self.blocks[blk];
        let writers = meta.writers;
        let readers = meta.readers & !writers;
        if writers != 0 {
            // i-th writer in core-id order pays i - 1.
            let mut last = 0usize;
            for (rank, c) in bits(writers).enumerate() {
                self.charge_block(c, rank as u64, blk);
                last = c;
            }
            for c in bits(readers) {
                self.charge_block(c, 1, blk);
            }
            let keep = 1u128 << last;
            for c in bits(meta.holders & !keep) {
                self.caches[c].invalidate(blk as u64);
            }
            self.blocks[blk].holders &= keep;
        }
        let m = &mut self.blocks[blk];
        m.writers = 0;
        m.readers = 0;
    }

    fn charge_block(&mut self, core: usize, k: u64, blk: usize) {
        if k == 0 {
            return;
        }
        self.counters[core].block_misses += k;
        self.cost_clock[core] += k * self.cfg.miss_latency;
        if let Some(t) = self.trace.as_mut() {
            for _ in 0..k {
                t.push(TraceEvent {
                    round: self.rounds,
                    core,
                    op: TraceOp::Settle,
                    addr: blk * self.cfg.b,
                    miss_kind: MissKind::Block,
                });
            }
        }
    }

    // ---- rounds ---------------------------------------------------------------

    /// Ends the current round for `group`.
    pub fn barrier(&mut self, group: Cores) {
        let gmask = group.mask();
        let mut closing: Vec<u32> = group.iter().map(|c| self.epoch[c]).collect();
        closing.sort_unstable();
        closing.dedup();

        let mut dirty = std::mem::take(&mut self.dirty);
        dirty.retain(|&blk| {
            let meta = self.blocks[blk];
            if meta.writers | meta.readers == 0 {
                return false;
            }
            if closing.binary_search(&meta.epoch).is_err() {
                return true;
            }
            // Cores outside the group that are still inside this round keep it open.
            let outside = (meta.writers | meta.readers) & !gmask;
            if bits(outside).any(|c| self.epoch[c] == meta.epoch) {
                return true;
            }
            self.settle(blk);
            false
        });
        self.dirty = dirty;

        let any_busy = group.iter().any(|c| self.busy[c]);
        let t_ops = group.iter().map(|c| self.ops_clock[c]).max().unwrap_or(0);
        let t_cost = group.iter().map(|c| self.cost_clock[c]).max().unwrap_or(0);
        let ep = self.next_epoch;
        self.next_epoch += 1;
        for c in group.iter() {
            self.ops_clock[c] = t_ops;
            self.cost_clock[c] = t_cost;
            self.epoch[c] = ep;
            self.busy[c] = false;
        }
        if any_busy {
            self.rounds += 1;
        }
    }

    /// Runs `step` for every core of `group` in lockstep rounds until every
    /// core has returned `false`. A core that returned `false` stays idle.
    pub fn run_rounds<F>(&mut self, group: Cores, mut step: F) -> Result<CostLedger, MachineError>
    where
        F: FnMut(&mut Machine, usize, u64) -> Result<bool, MachineError>,
    {
        let mut active = vec![true; group.len];
        let mut round = 0u64;
        while active.iter().any(|&a| a) {
            for (i, c) in group.iter().enumerate() {
                if active[i] {
                    active[i] = step(self, c, round)?;
                }
            }
            self.barrier(group);
            round += 1;
        }
        Ok(self.ledger())
    }

    // ---- reporting ------------------------------------------------------------

    pub fn ledger(&self) -> CostLedger {
        CostLedger {
            cores: self.counters.clone(),
            rounds: self.rounds,
            op_critical_path: self.ops_clock.iter().copied().max().unwrap_or(0),
            critical_path: self.cost_clock.iter().copied().max().unwrap_or(0),
        }
    }

    /// Elapsed (ops, cost) clock of one core.
    pub fn clock(&self, core: usize) -> (u64, u64) {
        (self.ops_clock[core], self.cost_clock[core])
    }

    pub fn diagnose(&mut self, kind: DiagnosticKind, message: String) {
        if self.diagnostics.len() < MAX_STORED_DIAGNOSTICS {
            self.diagnostics.push(Diagnostic { kind, round: self.rounds, message });
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Total races observed, including ones not stored.
    pub fn race_count(&self) -> u64 {
        self.race_count
    }

    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    /// Whether `core` currently caches the block holding `addr`.
    pub fn is_resident(&self, core: usize, addr: usize) -> bool {
        self.caches[core].contains((addr / self.cfg.b) as u64)
    }
}

fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let c = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(c)
        }
    })
}
