use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_primitives::util::block_chunks;
use pem_primitives::{seq_sort, KeyOrder, PemRng};
use pem_sort::{sample_sort_by, SortPlan};

use crate::HullResult;

/// Sorts on as many cores as `n >= M p` allows; one core sorts sequentially.
pub(crate) fn sort_region<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let p = (a.len / m.config().m).min(group.len);
    if p <= 1 {
        let c = group.core(0);
        let out = seq_sort(m, c, a, order, rng)?;
        m.barrier(group);
        Ok(out)
    } else {
        let plan = SortPlan::with_seed(rng.stream().at(0));
        let out = sample_sort_by(m, group.take(p), a, order, &plan)?.output;
        m.barrier(group);
        Ok(out)
    }
}

/// Fills `r` one block-aligned chunk per core.
pub(crate) fn fill(
    m: &mut Machine,
    group: Cores,
    r: MemRegion,
    mut f: impl FnMut(&mut Machine, usize, usize) -> HullResult<Word>,
) -> HullResult<()> {
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

/// A fresh region holding `0..n`.
pub(crate) fn iota(m: &mut Machine, group: Cores, n: usize) -> HullResult<MemRegion> {
    let r = m.alloc(n);
    fill(m, group, r, |_, _, i| Ok(i as Word))?;
    Ok(r)
}

/// A fresh region holding `words`, written by one core.
pub(crate) fn put(m: &mut Machine, core: usize, words: &[Word]) -> HullResult<MemRegion> {
    let r = m.alloc(words.len());
    for (i, &w) in words.iter().enumerate() {
        m.wr(core, r, i, w)?;
    }
    Ok(r)
}

/// Reads a whole region on one core.
pub(crate) fn get(m: &mut Machine, core: usize, r: MemRegion) -> HullResult<Vec<Word>> {
    (0..r.len).map(|i| Ok(m.rd(core, r, i)?)).collect()
}

pub(crate) fn log2(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}
