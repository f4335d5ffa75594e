//! The two-level square-root recursion.

use pem_machine::{chunk_ranges, Cores, DiagnosticKind, Machine, MachineConfig, MemRegion};
use pem_merge::{merge_bucketed_into, BucketedRun};
use pem_primitives::util::{isqrt, par_copy, with_scratch};
use pem_primitives::{allocate_cores, KeyOrder, PemError, PemRng, Result};

use crate::seq::partition_seq_into;

/// Sub-problems of at most this many keys always run sequentially.
pub const SEQ_FLOOR: usize = 64;

/// Splitter counts up to this are handled in one chunked pass; larger
/// counts first split on every `ceil(sqrt(z))`-th splitter.
const ONE_LEVEL_MAX: usize = 4;

/// A partitioning problem together with the root size and core count, which
/// stay fixed through the recursion so every level sees the same keys per
/// core.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionTask {
    pub input: MemRegion,
    /// Sorted splitters, `z` of them.
    pub splitters: MemRegion,
    pub root_n: usize,
    pub root_p: usize,
}

impl PartitionTask {
    /// A root task on `p` cores.
    pub fn new(input: MemRegion, splitters: MemRegion, p: usize) -> Self {
        PartitionTask { input, splitters, root_n: input.len, root_p: p.max(1) }
    }

    pub fn z(&self) -> usize {
        self.splitters.len
    }

    /// Keys per core at the root; sub-problems this small run on one core.
    pub fn grain(&self) -> usize {
        self.root_n / self.root_p
    }

    /// `2 / (1 - log_n z)`, the block-size exponent in the size requirement.
    pub fn q(&self) -> f64 {
        block_exponent(self.input.len, self.z())
    }

    /// Checks `z <= sqrt(n)`, `n >= M p`, `n >= B^q p` and that the
    /// splitters are sorted.
    pub fn check<O: KeyOrder + ?Sized>(&self, m: &Machine, order: &O) -> Result<()> {
        let n = self.input.len;
        let z = self.z();
        let cfg = m.config();
        if z * z > n {
            return Err(PemError::Precondition(format!("{z} splitters exceed sqrt(n) for n = {n}")));
        }
        size_check(cfg, n, z, self.root_p)?;
        let s = m.snapshot_memory(self.splitters)?;
        if s.windows(2).any(|w| order.less(w[1], w[0])) {
            return Err(PemError::Precondition("splitters are not sorted".into()));
        }
        Ok(())
    }
}

fn block_exponent(n: usize, z: usize) -> f64 {
    if n <= 1 || z <= 1 {
        return 2.0;
    }
    2.0 / (1.0 - (z as f64).ln() / (n as f64).ln())
}

fn size_check(cfg: &MachineConfig, n: usize, z: usize, p: usize) -> Result<()> {
    if n < cfg.m * p {
        return Err(PemError::Precondition(format!("n = {n} is below M p = {}", cfg.m * p)));
    }
    let need = (cfg.b as f64).powf(block_exponent(n, z)) * p as f64;
    if (n as f64) < need {
        return Err(PemError::Precondition(format!("n = {n} is below B^q p = {need:.0}")));
    }
    Ok(())
}

/// Partitions `task.input` into `z + 1` buckets after checking the
/// preconditions of [`PartitionTask::check`].
pub fn partition_main<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    task: PartitionTask,
    order: &O,
    rng: &mut PemRng,
) -> Result<BucketedRun> {
    task.check(m, order)?;
    run(m, group, task, order, rng)
}

/// [`partition_main`] without the size preconditions; a violation is
/// recorded as a diagnostic and the recursion proceeds anyway. The output is
/// correct for any input and any sorted splitters.
pub fn partition_main_unchecked<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    task: PartitionTask,
    order: &O,
    rng: &mut PemRng,
) -> Result<BucketedRun> {
    if let Err(e) = task.check(m, order) {
        m.diagnose(DiagnosticKind::Precondition, format!("partition root: {e}"));
    }
    run(m, group, task, order, rng)
}

fn run<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    task: PartitionTask,
    order: &O,
    rng: &mut PemRng,
) -> Result<BucketedRun> {
    let dest = m.alloc(task.input.len);
    let mut ctx = Ctx { floor: task.grain().max(SEQ_FLOOR), order, rng };
    ctx.part(m, group, task.input, task.splitters, dest)
}

struct Ctx<'a, O: ?Sized> {
    floor: usize,
    order: &'a O,
    rng: &'a mut PemRng,
}

impl<O: KeyOrder + ?Sized> Ctx<'_, O> {
    /// Partitions `a` by `spl` into `dest`.
    fn part(
        &mut self,
        m: &mut Machine,
        group: Cores,
        a: MemRegion,
        spl: MemRegion,
        dest: MemRegion,
    ) -> Result<BucketedRun> {
        let n = a.len;
        let z = spl.len;
        if z == 0 {
            par_copy(m, group, a, dest)?;
            return Ok(BucketedRun::single(dest));
        }
        if n <= self.floor || group.len == 1 {
            // Only the first core works; the caller's barrier syncs the rest.
            let c = group.core(0);
            let run = partition_seq_into(m, c, a, spl, dest, self.order, self.rng)?;
            m.barrier(Cores::one(c));
            return Ok(run);
        }
        if size_check(m.config(), n, z, group.len).is_err() {
            m.diagnose(
                DiagnosticKind::Precondition,
                format!("partition level n = {n}, z = {z}, p = {}: below B^q p", group.len),
            );
        }
        if z <= ONE_LEVEL_MAX {
            return self.chunked(m, group, a, spl, dest);
        }
        self.two_level(m, group, a, spl, dest)
    }

    /// Coarse pass on every `ceil(sqrt(z))`-th splitter, then each coarse
    /// bucket is split by the splitters strictly inside it.
    fn two_level(
        &mut self,
        m: &mut Machine,
        group: Cores,
        a: MemRegion,
        spl: MemRegion,
        dest: MemRegion,
    ) -> Result<BucketedRun> {
        let z = spl.len;
        let step = isqrt(z - 1) + 1;
        let cidx: Vec<usize> = (1..).map(|k| k * step - 1).take_while(|&i| i < z).collect();
        with_scratch(m, |m| -> Result<BucketedRun> {
            let coarse_spl = m.alloc(cidx.len());
            let c = group.core(0);
            for (k, &i) in cidx.iter().enumerate() {
                let v = m.rd(c, spl, i)?;
                m.wr(c, coarse_spl, k, v)?;
            }
            m.barrier(group);
            let coarse_out = m.alloc(a.len);
            let coarse = self.chunked(m, group, a, coarse_spl, coarse_out)?;

            let sizes: Vec<usize> = (0..coarse.buckets()).map(|j| coarse.bucket_len(j)).collect();
            let groups = allocate_cores(m, group, &sizes)?;
            let mut bounds = vec![0];
            for (j, g) in groups.into_iter().enumerate() {
                let lo = if j == 0 { 0 } else { cidx[j - 1] + 1 };
                let hi = cidx.get(j).copied().unwrap_or(z);
                let base = coarse.bounds[j];
                let d = dest.slice(base, sizes[j]);
                let fine = self.part(m, g, coarse.bucket(j), spl.slice(lo, hi - lo), d)?;
                bounds.extend(fine.bounds[1..].iter().map(|&x| base + x));
            }
            m.barrier(group);
            BucketedRun::new(dest, bounds)
        })
    }

    /// About `sqrt(n)` chunks, each partitioned recursively, then merged.
    fn chunked(
        &mut self,
        m: &mut Machine,
        group: Cores,
        a: MemRegion,
        spl: MemRegion,
        dest: MemRegion,
    ) -> Result<BucketedRun> {
        let n = a.len;
        let t = spl.len + 1;
        let root = isqrt(n);
        // The merge needs at least runs * buckets keys.
        let c = root.min(n / t);
        if c < 2 {
            m.diagnose(
                DiagnosticKind::Fallback,
                format!("{} splitters leave no room to chunk {n} keys; partitioning on one core", t - 1),
            );
            let core = group.core(0);
            let run = partition_seq_into(m, core, a, spl, dest, self.order, self.rng)?;
            m.barrier(group);
            return Ok(run);
        }
        if c < root {
            m.diagnose(DiagnosticKind::Note, format!("{n} keys cut into {c} chunks instead of {root}"));
        }
        let chunks = chunk_ranges(n, c);
        let sizes: Vec<usize> = chunks.iter().map(|r| r.len()).collect();
        let groups = allocate_cores(m, group, &sizes)?;
        with_scratch(m, |m| -> Result<BucketedRun> {
            let mut runs = Vec::with_capacity(c);
            for (r, g) in chunks.into_iter().zip(groups) {
                let out = m.alloc(r.len());
                runs.push(self.part(m, g, a.slice(r.start, r.len()), spl, out)?);
            }
            m.barrier(group);
            merge_bucketed_into(m, group, &runs, dest)
        })
    }
}
