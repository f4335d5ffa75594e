use pem_machine::{Machine, MemRegion};

use crate::order::KeyOrder;
use crate::util::with_scratch;
use crate::Result;

/// Stable in-place bottom-up merge sort of `region` by one core.
pub fn merge_sort_seq<O: KeyOrder + ?Sized>(m: &mut Machine, core: usize, region: MemRegion, order: &O) -> Result<()> {
    let n = region.len;
    if n < 2 {
        return Ok(());
    }
    with_scratch(m, |m| {
        let tmp = m.alloc(n);
        let (mut from, mut to) = (region, tmp);
        let mut width = 1;
        while width < n {
            let mut lo = 0;
            while lo < n {
                let mid = (lo + width).min(n);
                let hi = (lo + 2 * width).min(n);
                merge_runs(m, core, from, lo, mid, hi, to, order)?;
                lo = hi;
            }
            std::mem::swap(&mut from, &mut to);
            width *= 2;
        }
        if from != region {
            for i in 0..n {
                let v = m.rd(core, from, i)?;
                m.wr(core, region, i, v)?;
            }
        }
        Ok(())
    })
}

#[allow(clippy::too_many_arguments)]
fn merge_runs<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    src: MemRegion,
    lo: usize,
    mid: usize,
    hi: usize,
    dst: MemRegion,
    order: &O,
) -> Result<()> {
    let (mut i, mut j) = (lo, mid);
    let mut out = lo;
    let mut a = if i < mid { Some(m.rd(core, src, i)?) } else { None };
    let mut b = if j < hi { Some(m.rd(core, src, j)?) } else { None };
    while out < hi {
        let take_left = match (a, b) {
            (Some(x), Some(y)) => {
                m.work(core, 1);
                !order.less(y, x)
            }
            (Some(_), None) => true,
            _ => false,
        };
        if take_left {
            m.wr(core, dst, out, a.unwrap())?;
            i += 1;
            a = if i < mid { Some(m.rd(core, src, i)?) } else { None };
        } else {
            m.wr(core, dst, out, b.unwrap())?;
            j += 1;
            b = if j < hi { Some(m.rd(core, src, j)?) } else { None };
        }
        out += 1;
    }
    Ok(())
}
