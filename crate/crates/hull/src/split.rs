//! Splitting a point set by the line through its extreme points.

use std::cmp::Ordering;

use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_merge::{merge_bucketed, BucketedRun};
use pem_primitives::par_reduce;
use pem_primitives::util::{block_chunks, with_scratch};

use crate::geom::{orient, Point2};
use crate::HullResult;

/// Leftmost point (topmost among equals) and rightmost point (topmost among
/// equals), as handles.
pub(crate) fn extremes(m: &mut Machine, group: Cores, pts: &[Point2], handles: MemRegion) -> HullResult<(Word, Word)> {
    let key_lo = |h: Word| {
        let p = &pts[h as usize];
        (p.x.clone(), -p.y.clone(), h)
    };
    let key_hi = |h: Word| {
        let p = &pts[h as usize];
        (p.x.clone(), p.y.clone(), -h)
    };
    let lo = par_reduce(m, group, handles, |a, b| if key_lo(b) < key_lo(a) { b } else { a })?;
    let hi = par_reduce(m, group, handles, |a, b| if key_hi(b) > key_hi(a) { b } else { a })?;
    Ok((lo, hi))
}

/// `(upper, lower)`: points on or above the line from the leftmost to the
/// rightmost point go up, the rest down. Both extremes are in the upper set.
/// Each core writes its chunk as an upper bucket followed by a lower bucket
/// and the per-core runs are merged bucket-wise.
pub fn split_upper_lower(
    m: &mut Machine,
    group: Cores,
    pts: &[Point2],
    handles: MemRegion,
) -> HullResult<(MemRegion, MemRegion)> {
    let n = handles.len;
    if n == 0 {
        let e = m.alloc(0);
        return Ok((e, e));
    }
    let (lo, hi) = extremes(m, group, pts, handles)?;
    let (p1, p2) = (&pts[lo as usize], &pts[hi as usize]);
    let b = m.config().b;
    let out = m.alloc(n);
    let merged = with_scratch(m, |m| -> HullResult<BucketedRun> {
        let g = group.fit(n, b.max(2));
        let staged = m.alloc(n);
        let mut runs = Vec::with_capacity(g.len);
        for (ci, r) in block_chunks(handles, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            let mut up = Vec::new();
            let mut down = Vec::new();
            for i in r.clone() {
                let h = m.rd(c, handles, i)?;
                m.work(c, 1);
                let side = orient(p1, p2, &pts[h as usize]);
                if h == lo || h == hi || side != Ordering::Less {
                    up.push(h);
                } else {
                    down.push(h);
                }
            }
            for (k, &h) in up.iter().chain(&down).enumerate() {
                m.wr(c, staged, r.start + k, h)?;
            }
            let run = staged.slice(r.start, r.len());
            runs.push(BucketedRun { data: run, bounds: vec![0, up.len(), r.len()] });
        }
        m.barrier(group);
        let merged = merge_bucketed(m, group, &runs)?;
        pem_primitives::util::par_copy(m, group, merged.data, out)?;
        Ok(merged)
    })?;
    let cut = merged.bounds[1];
    Ok((out.slice(0, cut), out.slice(cut, n - cut)))
}
