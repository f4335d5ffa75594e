//! Reductions: per-core partials followed by a binary combining tree.

use pem_machine::{Cores, Machine, MemRegion, Word};

use crate::util::{block_chunks, with_scratch};
use crate::{PemError, Result};

/// Folds `a` with an associative `op`. Each core folds one contiguous chunk,
/// then partials (one per block) are combined pairwise in `log k` rounds.
pub fn par_reduce(m: &mut Machine, group: Cores, a: MemRegion, op: impl Fn(Word, Word) -> Word) -> Result<Word> {
    if a.is_empty() {
        return Err(PemError::Empty);
    }
    let b = m.config().b;
    let g = group.fit(a.len, b);
    let chunks = block_chunks(a, g.len, b);
    with_scratch(m, |m| {
        let t = m.alloc(g.len * b);
        let mut live = vec![false; g.len];
        for (i, r) in chunks.iter().enumerate() {
            if r.is_empty() {
                continue;
            }
            let c = g.core(i);
            let mut acc = m.rd(c, a, r.start)?;
            for j in r.start + 1..r.end {
                let v = m.rd(c, a, j)?;
                acc = op(acc, v);
                m.work(c, 1);
            }
            m.wr(c, t, i * b, acc)?;
            live[i] = true;
        }
        m.barrier(group);
        let mut step = 1;
        while step < g.len {
            for i in (0..g.len).step_by(2 * step) {
                let j = i + step;
                if j >= g.len || !live[j] {
                    continue;
                }
                let c = g.core(i);
                let right = m.rd(c, t, j * b)?;
                let v = if live[i] {
                    let left = m.rd(c, t, i * b)?;
                    m.work(c, 1);
                    op(left, right)
                } else {
                    right
                };
                m.wr(c, t, i * b, v)?;
                live[i] = true;
            }
            m.barrier(group);
            step *= 2;
        }
        let v = m.rd(g.core(0), t, 0)?;
        m.barrier(group);
        Ok(v)
    })
}

pub fn par_max(m: &mut Machine, group: Cores, a: MemRegion) -> Result<Word> {
    par_reduce(m, group, a, |x, y| x.max(y))
}

pub fn par_min(m: &mut Machine, group: Cores, a: MemRegion) -> Result<Word> {
    par_reduce(m, group, a, |x, y| x.min(y))
}

pub fn par_sum(m: &mut Machine, group: Cores, a: MemRegion) -> Result<Word> {
    par_reduce(m, group, a, |x, y| x.wrapping_add(y))
}
