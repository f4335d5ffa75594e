//! All-pairs rank sort.

use pem_machine::{chunk_ranges, Cores, Machine, MemRegion};

use crate::order::{less_at, KeyOrder};
use crate::util::{block_chunks, with_scratch};
use crate::Result;

/// Sorts `a` by computing every element's rank with all-pairs comparisons.
///
/// Elements are spread to `n * rank` in an `n^2`-word scratch array, one
/// element per core per round, so no two writes of a round share a block;
/// a final compaction reads the spread slots back in rank order. Equal
/// elements keep their input order.
pub fn brute_sort<O: KeyOrder + ?Sized>(m: &mut Machine, group: Cores, a: MemRegion, order: &O) -> Result<MemRegion> {
    let out = m.alloc(a.len);
    brute_sort_into(m, group, a, out, order)?;
    Ok(out)
}

/// [`brute_sort`] writing into `out`, which has the length of `a`.
pub fn brute_sort_into<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    out: MemRegion,
    order: &O,
) -> Result<()> {
    let n = a.len;
    assert_eq!(n, out.len);
    if n == 0 {
        return Ok(());
    }
    if n == 1 {
        let c = group.core(0);
        let v = m.rd(c, a, 0)?;
        m.wr(c, out, 0, v)?;
        m.barrier(group);
        return Ok(());
    }
    let b = m.config().b;
    with_scratch(m, |m| -> Result<()> {
        let g = group.fit(n * n, b).take(n);
        let ranks = m.alloc(n);
        let chunks = chunk_ranges(n, g.len);

        for (ci, r) in chunks.iter().enumerate() {
            let c = g.core(ci);
            for i in r.clone() {
                let v = m.rd(c, a, i)?;
                let mut rank = 0;
                for j in 0..n {
                    let w = m.rd(c, a, j)?;
                    m.work(c, 1);
                    if less_at(order, w, j, v, i) {
                        rank += 1;
                    }
                }
                m.wr(c, ranks, i, rank)?;
            }
        }
        m.barrier(group);

        let spread = m.alloc(n * n);
        let phases = chunks.iter().map(|r| r.len()).max().unwrap_or(0);
        for ph in 0..phases {
            for (ci, r) in chunks.iter().enumerate() {
                if ph >= r.len() {
                    continue;
                }
                let c = g.core(ci);
                let i = r.start + ph;
                let v = m.rd(c, a, i)?;
                let rank = m.rd(c, ranks, i)? as usize;
                m.wr(c, spread, n * rank, v)?;
            }
            m.barrier(group);
        }

        let h = group.fit(n, b);
        for (ci, r) in block_chunks(out, h.len, b).into_iter().enumerate() {
            let c = h.core(ci);
            for rank in r {
                let v = m.rd(c, spread, n * rank)?;
                m.wr(c, out, rank, v)?;
            }
        }
        m.barrier(group);
        Ok(())
    })
}
