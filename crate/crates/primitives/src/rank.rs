use pem_machine::{chunk_ranges, Cores, Machine, MemRegion, Word};

use crate::order::KeyOrder;
use crate::util::{block_chunks, with_scratch};
use crate::Result;

/// Number of elements of `a` strictly below `q`.
///
/// Each core counts within its chunk; the `k` partial counts are then added
/// by `max(1, k^2 / n)` cores, each folding a run of partials before a
/// pairwise combining tree.
pub fn rank<O: KeyOrder + ?Sized>(m: &mut Machine, group: Cores, q: Word, a: MemRegion, order: &O) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    let b = m.config().b;
    let g = group.fit(a.len, b);
    let k = g.len;
    let chunks = block_chunks(a, k, b);
    with_scratch(m, |m| {
        let partial = m.alloc(k * b);
        for (i, r) in chunks.iter().enumerate() {
            let c = g.core(i);
            let mut cnt = 0;
            for j in r.clone() {
                let v = m.rd(c, a, j)?;
                m.work(c, 1);
                if order.less(v, q) {
                    cnt += 1;
                }
            }
            m.wr(c, partial, i * b, cnt)?;
        }
        m.barrier(group);
        let adders = (k * k / a.len).clamp(1, k);
        let h = g.take(adders);
        let sums = m.alloc(adders * b);
        for (i, r) in chunk_ranges(k, adders).into_iter().enumerate() {
            let c = h.core(i);
            let mut acc: Word = 0;
            for j in r {
                acc += m.rd(c, partial, j * b)?;
                m.work(c, 1);
            }
            m.wr(c, sums, i * b, acc)?;
        }
        m.barrier(group);
        let mut step = 1;
        while step < adders {
            for i in (0..adders).step_by(2 * step) {
                let j = i + step;
                if j >= adders {
                    continue;
                }
                let c = h.core(i);
                let x = m.rd(c, sums, i * b)?;
                let y = m.rd(c, sums, j * b)?;
                m.work(c, 1);
                m.wr(c, sums, i * b, x + y)?;
            }
            m.barrier(group);
            step *= 2;
        }
        let total = m.rd(h.core(0), sums, 0)?;
        m.barrier(group);
        Ok(total as usize)
    })
}
