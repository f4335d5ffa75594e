//! Locating many queries among a few sorted keys by partitioning.

use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{KeyOrder, PemRng, Result};

use crate::recursive::{partition_main_unchecked, PartitionTask};

/// Handles `0..n` are queries and `n..` sorted keys. A query equal to a
/// sorted key orders before it, so it lands in that key's bucket.
struct Tagged<'a, O: ?Sized> {
    values: &'a [Word],
    n_queries: usize,
    order: &'a O,
}

impl<O: KeyOrder + ?Sized> KeyOrder for Tagged<'_, O> {
    fn less(&self, a: Word, b: Word) -> bool {
        let (va, vb) = (self.values[a as usize], self.values[b as usize]);
        if self.order.less(va, vb) {
            return true;
        }
        if self.order.less(vb, va) {
            return false;
        }
        let sa = a as usize >= self.n_queries;
        let sb = b as usize >= self.n_queries;
        (sa, a) < (sb, b)
    }
}

/// For every query, the number of `sorted` keys strictly below it, in query
/// order. Queries are partitioned as position handles and each bucket index
/// is then written back to its query's slot.
pub fn multisearch<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    queries: MemRegion,
    sorted: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> Result<MemRegion> {
    let n = queries.len;
    let b = m.config().b;
    let result = m.alloc(n);
    if n == 0 {
        return Ok(result);
    }
    let mut values = m.snapshot_memory(queries)?;
    values.extend(m.snapshot_memory(sorted)?);
    let tagged = Tagged { values: &values, n_queries: n, order };
    with_scratch(m, |m| -> Result<()> {
        let handles = m.alloc(n);
        let keys = m.alloc(sorted.len);
        fill_handles(m, group, handles, 0)?;
        fill_handles(m, group, keys, n)?;
        let task = PartitionTask::new(handles, keys, group.len);
        let run = partition_main_unchecked(m, group, task, &tagged, rng)?;

        let g = group.fit(n, b);
        for (ci, range) in block_chunks(run.data, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            let mut j = run.bounds.partition_point(|&x| x <= range.start) - 1;
            for pos in range {
                while pos >= run.bounds[j + 1] {
                    j += 1;
                }
                let h = m.rd(c, run.data, pos)?;
                m.wr(c, result, h as usize, j as Word)?;
            }
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(result)
}

fn fill_handles(m: &mut Machine, group: Cores, r: MemRegion, first: usize) -> Result<()> {
    let b = m.config().b;
    let g = group.fit(r.len, b);
    for (ci, range) in block_chunks(r, g.len, b).into_iter().enumerate() {
        let c = g.core(ci);
        for i in range {
            m.wr(c, r, i, (first + i) as Word)?;
        }
    }
    m.barrier(group);
    Ok(())
}
