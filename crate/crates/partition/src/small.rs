//! Partitioning by brute-force sorting, for inputs small enough that
//! quadratic work is affordable.

use pem_machine::{chunk_ranges, Cores, Machine, MemRegion};
use pem_merge::{merge_bucketed_into, BucketedRun};
use pem_primitives::util::{isqrt, with_scratch};
use pem_primitives::{allocate_cores, brute_sort_into, KeyOrder, Result};

/// Brute-force sorts `a` on the group; then each splitter's cut is found by
/// binary search, the splitters spread over the cores.
pub fn partition_quadratic<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    splitters: MemRegion,
    order: &O,
) -> Result<BucketedRun> {
    let dest = m.alloc(a.len);
    partition_quadratic_into(m, group, a, splitters, dest, order)
}

pub(crate) fn partition_quadratic_into<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    splitters: MemRegion,
    dest: MemRegion,
    order: &O,
) -> Result<BucketedRun> {
    let n = a.len;
    let z = splitters.len;
    brute_sort_into(m, group, a, dest, order)?;
    let mut bounds = vec![0; z + 2];
    bounds[z + 1] = n;
    let g = group.take(z);
    for (ci, r) in chunk_ranges(z, g.len).into_iter().enumerate() {
        let c = g.core(ci);
        for i in r {
            let s = m.rd(c, splitters, i)?;
            // First position holding a key above s.
            let (mut lo, mut hi) = (0, n);
            while lo < hi {
                let mid = (lo + hi) / 2;
                let k = m.rd(c, dest, mid)?;
                m.work(c, 1);
                if order.less(s, k) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            bounds[i + 1] = lo;
        }
    }
    m.barrier(group);
    BucketedRun::new(dest, bounds)
}

/// Cuts `a` into about `sqrt(n)` chunks, partitions each with
/// [`partition_quadratic`] on its share of the cores and merges the runs.
///
/// The chunk count drops below `sqrt(n)` when needed so that the merge sees
/// at least as many keys as runs times buckets.
pub fn partition_sqrt<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    splitters: MemRegion,
    order: &O,
) -> Result<BucketedRun> {
    let dest = m.alloc(a.len);
    partition_sqrt_into(m, group, a, splitters, dest, order)
}

pub(crate) fn partition_sqrt_into<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    splitters: MemRegion,
    dest: MemRegion,
    order: &O,
) -> Result<BucketedRun> {
    let n = a.len;
    let c = isqrt(n).min(n / (splitters.len + 1));
    if c < 2 {
        return partition_quadratic_into(m, group, a, splitters, dest, order);
    }
    let chunks = chunk_ranges(n, c);
    let sizes: Vec<usize> = chunks.iter().map(|r| r.len()).collect();
    let groups = allocate_cores(m, group, &sizes)?;
    with_scratch(m, |m| -> Result<BucketedRun> {
        let mut runs = Vec::with_capacity(c);
        for (r, g) in chunks.into_iter().zip(groups) {
            runs.push(partition_quadratic(m, g, a.slice(r.start, r.len()), splitters, order)?);
        }
        m.barrier(group);
        merge_bucketed_into(m, group, &runs, dest)
    })
}
