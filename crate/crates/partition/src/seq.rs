use pem_machine::{Machine, MemRegion};
use pem_merge::BucketedRun;
use pem_primitives::{seq_sort_into, KeyOrder, PemRng, Result};

/// Sorts `a` on one core, then cuts the sorted run at the splitters with
/// one joint scan.
pub fn partition_seq<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    a: MemRegion,
    splitters: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> Result<BucketedRun> {
    let dest = m.alloc(a.len);
    partition_seq_into(m, core, a, splitters, dest, order, rng)
}

pub(crate) fn partition_seq_into<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    a: MemRegion,
    splitters: MemRegion,
    dest: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> Result<BucketedRun> {
    seq_sort_into(m, core, a, dest, order, rng)?;
    let bounds = cut_sorted(m, core, dest, splitters, order)?;
    BucketedRun::new(dest, bounds)
}

/// Bucket bounds of a sorted run.
fn cut_sorted<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    sorted: MemRegion,
    splitters: MemRegion,
    order: &O,
) -> Result<Vec<usize>> {
    let n = sorted.len;
    let mut bounds = Vec::with_capacity(splitters.len + 2);
    bounds.push(0);
    let mut pos = 0;
    let mut key = if n > 0 { Some(m.rd(core, sorted, 0)?) } else { None };
    for i in 0..splitters.len {
        let s = m.rd(core, splitters, i)?;
        while let Some(k) = key {
            m.work(core, 1);
            if order.less(s, k) {
                break;
            }
            pos += 1;
            key = if pos < n { Some(m.rd(core, sorted, pos)?) } else { None };
        }
        bounds.push(pos);
    }
    bounds.push(n);
    Ok(bounds)
}
