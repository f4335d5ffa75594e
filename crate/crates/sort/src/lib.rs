//! Randomized distribution sort.
//!
//! Each level samples `ceil(n^(1/x))` splitters, partitions the keys, checks
//! the largest bucket against `tau(n)` (resampling if it is too large) and
//! sorts the buckets recursively on core groups sized by bucket. Problems of
//! at most `N/P` keys, or with one core, are sorted sequentially.
//!
//! Keys are sorted as `(key, position)` records so equal keys are still
//! distinct, which keeps bucket boundaries well defined on constant inputs.

use pem_machine::{Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_partition::{partition_main_unchecked, PartitionTask};
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{
    allocate_cores, oversampling, sample_splitters, seq_sort_into, KeyOrder, Natural, PemError, PemRng, Result,
};

pub use pem_primitives::seq_sort;

/// Parameters of one sort.
#[derive(Clone, Debug, PartialEq)]
pub struct SortPlan {
    /// Sampling exponent: `ceil(n^(1/x))` splitters per level.
    pub x: u32,
    /// Resampling rounds allowed per level before giving up.
    pub retry_cap: u32,
    /// Multiplier on `tau`; 1 for the analysed threshold.
    pub tau_scale: f64,
    pub seed: u64,
}

impl Default for SortPlan {
    fn default() -> Self {
        SortPlan { x: 32, retry_cap: 20, tau_scale: 1.0, seed: 0 }
    }
}

impl SortPlan {
    pub fn with_seed(seed: u64) -> Self {
        SortPlan { seed, ..Self::default() }
    }

    /// `(1 + t^(-1/6)) n^(1 - 1/x)` with `t = sqrt(n) / n^(1/x)`.
    pub fn tau(&self, n: usize) -> f64 {
        let t = oversampling(n, self.x);
        let nf = n as f64;
        self.tau_scale * (1.0 + t.powf(-1.0 / 6.0)) * nf.powf(1.0 - 1.0 / self.x as f64)
    }

    /// Largest bucket a level accepts: `tau(n)`, but always less than `n`
    /// so every accepted level makes progress.
    pub fn accept_limit(&self, n: usize) -> usize {
        (self.tau(n).floor() as usize).min(n.saturating_sub(1))
    }
}

/// One partitioning round.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub n: usize,
    pub cores: usize,
    pub buckets: usize,
    pub max_bucket: usize,
    pub tau: f64,
    pub accepted: bool,
}

impl Round {
    /// `log_n` of the largest bucket.
    pub fn exponent(&self) -> f64 {
        if self.n <= 1 || self.max_bucket == 0 {
            return 0.0;
        }
        (self.max_bucket as f64).ln() / (self.n as f64).ln()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortStats {
    pub rounds: Vec<Round>,
    /// Rejected rounds over the whole sort.
    pub retries: u32,
    /// Sub-problems handed to the sequential sort.
    pub sequential_leaves: usize,
}

impl SortStats {
    /// Rounds whose largest bucket exceeded `tau(n)`.
    pub fn resample_events(&self) -> usize {
        self.rounds.iter().filter(|r| r.max_bucket as f64 > r.tau).count()
    }
}

#[derive(Clone, Debug)]
pub struct SortOutcome {
    pub output: MemRegion,
    pub stats: SortStats,
}

/// Sorts integer keys on `group`. Requires `n >= M p` for `p = group.len`.
pub fn sample_sort(m: &mut Machine, group: Cores, a: MemRegion, plan: &SortPlan) -> Result<SortOutcome> {
    sample_sort_by(m, group, a, &Natural, plan)
}

/// [`sample_sort`] under `order`. Equal words keep no particular order
/// among themselves.
pub fn sample_sort_by<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    order: &O,
    plan: &SortPlan,
) -> Result<SortOutcome> {
    let n = a.len;
    let cfg = m.config();
    if n > 0 && n < cfg.m * group.len {
        return Err(PemError::Precondition(format!(
            "n = {n} is below M p = {} (p = {})",
            cfg.m * group.len,
            group.len
        )));
    }
    if plan.x < 4 {
        return Err(PemError::Precondition(format!("sampling exponent x = {} must be at least 4", plan.x)));
    }
    let out = m.alloc(n);
    let mut stats = SortStats::default();
    if n == 0 {
        return Ok(SortOutcome { output: out, stats });
    }
    let values = m.snapshot_memory(a)?;
    let tagged = Tagged { values: &values, order };
    let mut rng = PemRng::new(plan.seed);
    with_scratch(m, |m| -> Result<()> {
        let handles = m.alloc(n);
        let sorted = m.alloc(n);
        map_blocks(m, group, handles, |m, c, i| {
            m.rd(c, a, i)?;
            Ok(i as Word)
        })?;
        let mut ctx = Ctx { plan, order: &tagged, rng: &mut rng, stats: &mut stats, grain: n / group.len };
        ctx.sort(m, group, handles, sorted)?;
        map_blocks(m, group, out, |m, c, i| Ok(values[m.rd(c, sorted, i)? as usize]))?;
        Ok(())
    })?;
    Ok(SortOutcome { output: out, stats })
}

/// Fills `r` block-chunk by block-chunk, one chunk per core.
fn map_blocks(
    m: &mut Machine,
    group: Cores,
    r: MemRegion,
    mut f: impl FnMut(&mut Machine, usize, usize) -> Result<Word>,
) -> Result<()> {
    let b = m.config().b;
    let g = group.fit(r.len, b);
    for (ci, range) in block_chunks(r, g.len, b).into_iter().enumerate() {
        let c = g.core(ci);
        for i in range {
            let v = f(m, c, i)?;
            m.wr(c, r, i, v)?;
        }
    }
    m.barrier(group);
    Ok(())
}

/// Handles into `values`, ordered by value and then by handle.
struct Tagged<'a, O: ?Sized> {
    values: &'a [Word],
    order: &'a O,
}

impl<O: KeyOrder + ?Sized> KeyOrder for Tagged<'_, O> {
    fn less(&self, a: Word, b: Word) -> bool {
        let (va, vb) = (self.values[a as usize], self.values[b as usize]);
        self.order.less(va, vb) || (!self.order.less(vb, va) && a < b)
    }
}

struct Ctx<'a, O: ?Sized> {
    plan: &'a SortPlan,
    order: &'a O,
    rng: &'a mut PemRng,
    stats: &'a mut SortStats,
    /// `N / P` of the root problem.
    grain: usize,
}

impl<O: KeyOrder + ?Sized> Ctx<'_, O> {
    /// Sorts `src` into `dest`.
    fn sort(&mut self, m: &mut Machine, group: Cores, src: MemRegion, dest: MemRegion) -> Result<()> {
        let n = src.len;
        if n <= self.grain || group.len == 1 || n < 2 {
            let c = group.core(0);
            seq_sort_into(m, c, src, dest, self.order, self.rng)?;
            m.barrier(Cores::one(c));
            self.stats.sequential_leaves += 1;
            return Ok(());
        }
        let limit = self.plan.accept_limit(n);
        let tau = self.plan.tau(n);
        let mut level_retries = 0;
        with_scratch(m, |m| -> Result<()> {
            let run = loop {
                let mark = m.mark();
                let spl = sample_splitters(m, group, src, self.plan.x, self.order, self.rng)?;
                let task = PartitionTask::new(src, spl.region, group.len);
                let run = partition_main_unchecked(m, group, task, self.order, self.rng)?;
                let max_bucket = (0..run.buckets()).map(|j| run.bucket_len(j)).max().unwrap_or(0);
                let accepted = max_bucket <= limit;
                self.stats.rounds.push(Round {
                    n,
                    cores: group.len,
                    buckets: run.buckets(),
                    max_bucket,
                    tau,
                    accepted,
                });
                if accepted {
                    break run;
                }
                m.release(mark);
                self.stats.retries += 1;
                level_retries += 1;
                if level_retries > self.plan.retry_cap {
                    let detail = format!("largest bucket {max_bucket} of {n} keys against limit {limit}");
                    m.diagnose(DiagnosticKind::Fallback, format!("sort gave up: {detail}"));
                    return Err(PemError::RetryCap { retries: level_retries, detail });
                }
            };
            let sizes: Vec<usize> = (0..run.buckets()).map(|j| run.bucket_len(j)).collect();
            let groups = allocate_cores(m, group, &sizes)?;
            for (j, g) in groups.into_iter().enumerate() {
                if sizes[j] == 0 {
                    continue;
                }
                let d = dest.slice(run.bounds[j], sizes[j]);
                self.sort(m, g, run.bucket(j), d)?;
            }
            m.barrier(group);
            Ok(())
        })
    }
}
