//! Processor-oblivious execution: cores that know neither their number nor
//! their ids estimate the core count, give themselves unique ids and split
//! an array between them.
//!
//! The cores work in a slot array of `L = n / log n` counters. Each core
//! bumps a random slot; the first core in every slot walks left one slot
//! per round until it meets an occupied slot, so only the leftmost one
//! reaches slot 0. That core walks right adding up slot counts until it has
//! seen `log n` cores at slot `beta` and publishes `p_hat = k L log n / beta`.
//! Slots are then grouped into blocks of `L log n / p_hat` slots; the first
//! core of every block (found by the same leftward walk, stopped at the
//! block start) numbers the cores of its block and claims the data of the
//! empty blocks that follow it. A core's id is `(block, rank in block)`.
//!
//! Loops over cores below only play out the lockstep rounds; no decision
//! reads the number of cores.

use std::ops::Range;

use pem_machine::{chunk_ranges, Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_primitives::util::with_scratch;
use pem_primitives::{prefix_sum, PemRng, Result};

/// Estimation parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ObliviousConfig {
    /// `k` in `p_hat = k L log n / beta`, calibrated against runs with a
    /// known core count.
    pub scale: f64,
    /// Ids allow `cap_factor * log n` cores per block; a fuller block makes
    /// the assignment fail.
    pub cap_factor: usize,
    pub seed: u64,
}

impl Default for ObliviousConfig {
    fn default() -> Self {
        ObliviousConfig { scale: 1.0, cap_factor: 4, seed: 0 }
    }
}

impl ObliviousConfig {
    pub fn with_seed(seed: u64) -> Self {
        ObliviousConfig { seed, ..Self::default() }
    }
}

/// What one core learned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreId {
    pub core: usize,
    /// Slot the core bumped, and how many cores bumped it before.
    pub slot: usize,
    pub arrival: usize,
    /// High part of the id: the slot block.
    pub block: usize,
    /// Low part: rank among the cores of the block.
    pub rank: usize,
    /// Data positions this core owns.
    pub owned: Range<usize>,
}

impl CoreId {
    /// `block * cap + rank`.
    pub fn id(&self, cap: usize) -> usize {
        self.block * cap + self.rank
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdAssignment {
    pub n: usize,
    /// `L = n / log n` slots.
    pub slots: usize,
    pub log_n: usize,
    pub estimated_p: usize,
    /// 1-based slot where the leftmost core's count reached `log n`, or `L`
    /// when fewer cores exist.
    pub beta: usize,
    /// Cores counted by the leftmost core, with multiplicity.
    pub counted: usize,
    /// Slots per block, `b = ceil(L log n / p_hat)`.
    pub block_slots: usize,
    pub blocks: usize,
    /// Data positions per full block, `alpha = ceil(n b / L)`. A block's
    /// data is proportional to its slots, so a short last block gets less.
    pub alpha: usize,
    /// Largest rank an id may carry, plus one.
    pub cap: usize,
    /// Per core, in core order.
    pub cores: Vec<CoreId>,
    /// Simulator rounds spent by each phase: bump, leftmost walk, count,
    /// block walk, numbering.
    pub phase_rounds: [u64; 5],
    /// Block misses of the bumping step.
    pub write_block_misses: u64,
}

impl IdAssignment {
    pub fn ids(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.id(self.cap)).collect()
    }
}

/// Assignment failures; the data is still correct but cannot be split.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AssignError {
    #[error("block {block} holds {count} cores, above the id capacity {cap}")]
    BlockOverflow { block: usize, count: usize, cap: usize },
    #[error("{0} slots leave no room to estimate")]
    TooFewSlots(usize),
}

fn log2_floor(n: usize) -> usize {
    (usize::BITS - 1 - n.max(2).leading_zeros()) as usize
}

/// Runs the lockstep loop: `step(m, round, i, core)` is called for every
/// still-active core each round and returns whether the core stays active.
fn rounds(
    m: &mut Machine,
    group: Cores,
    active: &mut [bool],
    mut step: impl FnMut(&mut Machine, usize, usize, usize) -> Result<bool>,
) -> Result<u64> {
    let mut r = 0;
    while active.iter().any(|&a| a) {
        for (i, c) in group.iter().enumerate() {
            if active[i] {
                active[i] = step(m, r, i, c)?;
            }
        }
        m.barrier(group);
        r += 1;
    }
    Ok(r as u64)
}

/// Estimates the number of cores in `group` with a slot array sized for
/// `n` data words, and assigns every core an id and a range of `[0, n)`.
pub fn estimate_processors(
    m: &mut Machine,
    group: Cores,
    n: usize,
    cfg: &ObliviousConfig,
) -> Result<std::result::Result<IdAssignment, AssignError>> {
    let log_n = log2_floor(n).max(1);
    let slots = n / log_n;
    if slots == 0 {
        return Ok(Err(AssignError::TooFewSlots(slots)));
    }
    let k = group.len;
    let mut rng = PemRng::new(cfg.seed);
    let mut stream = rng.stream();
    let cnt = m.alloc(slots);
    let base = m.alloc(slots);
    let shared = m.alloc(1);
    let mut phase_rounds = [0u64; 5];

    // Bump: a slot's counter is a multiplicity counter, so colliding cores
    // take turns in arrival order (lowest core first, as the write
    // arbitration resolves it).
    let slot: Vec<usize> = (0..k).map(|i| stream.below(i as u64, slots as u64) as usize).collect();
    let mut arrival = vec![0usize; k];
    {
        let mut seen = std::collections::HashMap::new();
        for i in 0..k {
            let e = seen.entry(slot[i]).or_insert(0usize);
            arrival[i] = *e;
            *e += 1;
        }
    }
    let before = m.ledger();
    let mut active = vec![true; k];
    phase_rounds[0] = rounds(m, group, &mut active, |m, r, i, c| {
        if arrival[i] != r {
            return Ok(true);
        }
        let v = m.rd(c, cnt, slot[i])?;
        m.wr(c, cnt, slot[i], v + 1)?;
        Ok(false)
    })?;
    let write_block_misses = m.ledger().since(&before).block_misses();

    // Leftmost election: first arrivals walk left until an occupied slot.
    let mut pos: Vec<usize> = slot.clone();
    let mut leftmost = None;
    let mut active: Vec<bool> = arrival.iter().map(|&a| a == 0).collect();
    phase_rounds[1] = rounds(m, group, &mut active, |m, _, i, c| {
        if pos[i] == 0 {
            leftmost = Some(i);
            return Ok(false);
        }
        let v = m.rd(c, cnt, pos[i] - 1)?;
        if v != 0 {
            return Ok(false);
        }
        pos[i] -= 1;
        Ok(true)
    })?;
    let lead = leftmost.expect("some core bumped a slot");

    // Count: the leftmost core walks right until log n cores are seen.
    let mut at = slot[lead];
    let mut counted = 0usize;
    let mut beta = slots;
    let mut active: Vec<bool> = (0..k).map(|i| i == lead).collect();
    phase_rounds[2] = rounds(m, group, &mut active, |m, _, _, c| {
        counted += m.rd(c, cnt, at)? as usize;
        at += 1;
        if counted >= log_n {
            beta = at;
            return Ok(false);
        }
        Ok(at < slots)
    })?;
    let estimated_p = if counted >= log_n {
        ((cfg.scale * (slots * log_n) as f64 / beta as f64).round() as usize).max(1)
    } else {
        counted
    };
    let c0 = group.core(lead);
    m.wr(c0, shared, 0, estimated_p as Word)?;
    m.barrier(group);
    for c in group.iter() {
        m.rd(c, shared, 0)?;
    }
    m.barrier(group);

    let block_slots = (slots * log_n).div_ceil(estimated_p).clamp(1, slots);
    let blocks = slots.div_ceil(block_slots);
    let alpha = (n * block_slots).div_ceil(slots);
    let data_at = |block: usize| (block * block_slots).min(slots) * n / slots;
    let cap = cfg.cap_factor * log_n;

    // Block leaders: the same walk, stopped at the block start.
    let mut pos: Vec<usize> = slot.clone();
    let mut leader = vec![false; k];
    let mut active: Vec<bool> = arrival.iter().map(|&a| a == 0).collect();
    phase_rounds[3] = rounds(m, group, &mut active, |m, _, i, c| {
        if pos[i].is_multiple_of(block_slots) {
            leader[i] = true;
            return Ok(false);
        }
        if m.rd(c, cnt, pos[i] - 1)? != 0 {
            return Ok(false);
        }
        pos[i] -= 1;
        Ok(true)
    })?;

    // Numbering: each leader scans its block writing slot bases, then the
    // empty blocks after it, which it takes over.
    // Per block: cores, next occupied block, and whether it is the first.
    let info = m.alloc(3 * blocks);
    // A leader is the first occupied slot of its block.
    let mut scan: Vec<usize> = slot.clone();
    let mut seen = vec![0usize; k];
    let mut overflow = None;
    let mut active = leader.clone();
    phase_rounds[4] = rounds(m, group, &mut active, |m, _, i, c| {
        let own = slot[i] / block_slots;
        let s = scan[i];
        let inside = s < slots && s / block_slots == own;
        if inside {
            let v = m.rd(c, cnt, s)? as usize;
            if v > 0 {
                m.wr(c, base, s, seen[i] as Word)?;
            }
            seen[i] += v;
            scan[i] += 1;
            return Ok(true);
        }
        // Past the block: stop at the next occupied slot or the end.
        if s < slots && m.rd(c, cnt, s)? == 0 {
            scan[i] += 1;
            return Ok(true);
        }
        let next = if s < slots { s / block_slots } else { blocks };
        if seen[i] > cap && overflow.is_none() {
            overflow = Some(AssignError::BlockOverflow { block: own, count: seen[i], cap });
        }
        m.wr(c, info, 3 * own, seen[i] as Word)?;
        m.wr(c, info, 3 * own + 1, next as Word)?;
        m.wr(c, info, 3 * own + 2, (i == lead) as Word)?;
        Ok(false)
    })?;
    if let Some(e) = overflow {
        return Ok(Err(e));
    }

    let mut cores = Vec::with_capacity(k);
    for (i, c) in group.iter().enumerate() {
        let block = slot[i] / block_slots;
        let rank = m.rd(c, base, slot[i])? as usize + arrival[i];
        let count = m.rd(c, info, 3 * block)? as usize;
        let next = m.rd(c, info, 3 * block + 1)? as usize;
        let first = m.rd(c, info, 3 * block + 2)? != 0;
        let lo = if first { 0 } else { data_at(block) };
        let hi = if next >= blocks { n } else { data_at(next) };
        let r = &chunk_ranges(hi - lo, count)[rank];
        cores.push(CoreId {
            core: c,
            slot: slot[i],
            arrival: arrival[i],
            block,
            rank,
            owned: lo + r.start..lo + r.end,
        });
    }
    m.barrier(group);
    Ok(Ok(IdAssignment {
        n,
        slots,
        log_n,
        estimated_p,
        beta,
        counted,
        block_slots,
        blocks,
        alpha,
        cap,
        cores,
        phase_rounds,
        write_block_misses,
    }))
}

/// The id-to-range mapping of a finished estimate, checked: ids distinct,
/// ranges disjoint and covering `[0, n)`.
pub fn assign_ids(a: &IdAssignment) -> std::result::Result<Vec<(usize, Range<usize>)>, String> {
    let mut out: Vec<(usize, Range<usize>)> = a.cores.iter().map(|c| (c.id(a.cap), c.owned.clone())).collect();
    let mut ids: Vec<usize> = out.iter().map(|x| x.0).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate id".into());
    }
    out.sort_by_key(|x| x.0);
    let mut ranges: Vec<Range<usize>> = out.iter().map(|x| x.1.clone()).filter(|r| !r.is_empty()).collect();
    ranges.sort_by_key(|r| r.start);
    let mut at = 0;
    for r in &ranges {
        if r.start != at {
            return Err(format!("gap or overlap at {at}"));
        }
        at = r.end;
    }
    if at != a.n {
        return Err(format!("ranges end at {at}, not {}", a.n));
    }
    Ok(out)
}

/// Inclusive prefix sums of `a` on cores that first estimate their number
/// and ids. On an assignment failure one core sums everything.
pub fn oblivious_prefix(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    cfg: &ObliviousConfig,
) -> Result<(MemRegion, Option<IdAssignment>)> {
    let n = a.len;
    let out = m.alloc(n);
    if n == 0 {
        return Ok((out, None));
    }
    let assignment = with_scratch(m, |m| estimate_processors(m, group, n, cfg))?;
    let asg = match assignment {
        Ok(asg) => asg,
        Err(e) => {
            m.diagnose(DiagnosticKind::Fallback, format!("oblivious prefix on one core: {e}"));
            let c = group.core(0);
            let mut acc: Word = 0;
            for i in 0..n {
                acc = acc.wrapping_add(m.rd(c, a, i)?);
                m.wr(c, out, i, acc)?;
            }
            m.barrier(group);
            return Ok((out, None));
        }
    };
    with_scratch(m, |m| -> Result<()> {
        // Partials by id; unused ids stay zero.
        let ids = asg.blocks * asg.cap;
        let partial = m.alloc(ids);
        for (ci, c) in group.iter().enumerate() {
            let me = &asg.cores[ci];
            let mut s: Word = 0;
            for i in me.owned.clone() {
                s = s.wrapping_add(m.rd(c, a, i)?);
            }
            m.wr(c, partial, me.id(asg.cap), s)?;
        }
        m.barrier(group);
        let sums = prefix_sum(m, group, partial)?;
        for (ci, c) in group.iter().enumerate() {
            let me = &asg.cores[ci];
            if me.owned.is_empty() {
                continue;
            }
            let id = me.id(asg.cap);
            let mut acc = if id == 0 { 0 } else { m.rd(c, sums, id - 1)? };
            for i in me.owned.clone() {
                acc = acc.wrapping_add(m.rd(c, a, i)?);
                m.wr(c, out, i, acc)?;
            }
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok((out, Some(asg)))
}
