//! Maximal points: `q` is dominated when some `p` has `p.x > q.x` and
//! `p.y > q.y`. Equal x-coordinates never dominate each other.

use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_merge::concat_runs;
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{prefix_scan, seq_sort, PemRng};

use crate::geom::Point2;
use crate::util::{put, sort_region};
use crate::HullResult;

fn by_x(pts: &[Point2]) -> impl Fn(Word, Word) -> bool + '_ {
    move |a, b| (&pts[a as usize], a) < (&pts[b as usize], b)
}

/// Sweeps `sorted[range]` right to left, writing the maximal handles to `out`
/// in decreasing-x order. `above` is the highest point strictly to the right
/// of the range (or -1). Returns how many were written.
fn sweep(
    m: &mut Machine,
    c: usize,
    pts: &[Point2],
    sorted: MemRegion,
    range: std::ops::Range<usize>,
    above: Word,
    out: MemRegion,
) -> HullResult<usize> {
    let mut best = (above >= 0).then(|| pts[above as usize].y.clone());
    let mut written = 0;
    let mut i = range.end;
    while i > range.start {
        // One run of equal x.
        let first = m.rd(c, sorted, i - 1)? as usize;
        let x = &pts[first].x;
        let mut group_max = pts[first].y.clone();
        let mut j = i;
        while j > range.start {
            let h = m.rd(c, sorted, j - 1)? as usize;
            m.work(c, 1);
            if &pts[h].x != x {
                break;
            }
            if best.as_ref().is_none_or(|b| pts[h].y >= *b) {
                m.wr(c, out, written, h as Word)?;
                written += 1;
            }
            if pts[h].y > group_max {
                group_max = pts[h].y.clone();
            }
            j -= 1;
        }
        if best.as_ref().is_none_or(|b| group_max > *b) {
            best = Some(group_max);
        }
        i = j;
    }
    Ok(written)
}

/// Maximal points among `handles` on one core, in decreasing-x order (equal
/// x by decreasing y).
pub fn maxima_seq(
    m: &mut Machine,
    core: usize,
    pts: &[Point2],
    handles: MemRegion,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let n = handles.len;
    let out = m.alloc(n);
    let k = with_scratch(m, |m| -> HullResult<usize> {
        let sorted = seq_sort(m, core, handles, &by_x(pts), rng)?;
        sweep(m, core, pts, sorted, 0..n, -1, out)
    })?;
    m.barrier(Cores::one(core));
    Ok(out.slice(0, k))
}

/// [`maxima_seq`] on a core group: sort by x, one chunk per core (chunk cuts
/// moved so runs of equal x stay together), suffix maxima of the per-chunk
/// highest points by a prefix computation, local sweeps, concatenation.
pub fn maxima_par(
    m: &mut Machine,
    group: Cores,
    pts: &[Point2],
    handles: MemRegion,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let n = handles.len;
    let b = m.config().b;
    let g = group.fit(n, b);
    if g.len == 1 {
        return maxima_seq(m, group.core(0), pts, handles, rng);
    }
    let runs_base = m.alloc(n);
    let mut runs = Vec::with_capacity(g.len);
    with_scratch(m, |m| -> HullResult<()> {
        let sorted = sort_region(m, group, handles, &by_x(pts), rng)?;
        let raw = block_chunks(sorted, g.len, b);
        // Each core moves its start past a run of equal x begun by its left
        // neighbour; ends follow from the next core's start.
        let mut starts = Vec::with_capacity(g.len + 1);
        for (ci, r) in raw.iter().enumerate() {
            let c = g.core(ci);
            let mut s = r.start;
            if s > 0 && s < n {
                let prev = m.rd(c, sorted, s - 1)? as usize;
                while s < n {
                    let h = m.rd(c, sorted, s)? as usize;
                    m.work(c, 1);
                    if pts[h].x != pts[prev].x {
                        break;
                    }
                    s += 1;
                }
            }
            starts.push(s.max(starts.last().copied().unwrap_or(0)));
        }
        starts.push(n);
        let ranges: Vec<_> = (0..g.len).map(|i| starts[i]..starts[i + 1].max(starts[i])).collect();

        let tops = m.alloc(g.len * b);
        for (ci, r) in ranges.iter().enumerate() {
            let c = g.core(ci);
            let mut best: Word = -1;
            for i in r.clone() {
                let h = m.rd(c, sorted, i)?;
                m.work(c, 1);
                if best < 0 || pts[h as usize].y > pts[best as usize].y {
                    best = h;
                }
            }
            m.wr(c, tops, ci * b, best)?;
        }
        m.barrier(group);
        // Reversed chunk order, so the prefix runs from the right.
        let c0 = g.core(0);
        let rev: Vec<Word> = (0..g.len).rev().map(|ci| Ok(m.rd(c0, tops, ci * b)?)).collect::<HullResult<_>>()?;
        let rev = put(m, c0, &rev)?;
        m.barrier(group);
        let higher = |a: Word, b: Word| -> Word {
            if a < 0 || (b >= 0 && pts[b as usize].y > pts[a as usize].y) {
                b
            } else {
                a
            }
        };
        let suffix = prefix_scan(m, group, rev, &higher, -1)?;

        for (ci, r) in ranges.iter().enumerate() {
            let c = g.core(ci);
            let above = if ci + 1 == g.len { -1 } else { m.rd(c, suffix, g.len - 2 - ci)? };
            let out = runs_base.slice(r.start, r.len());
            let k = sweep(m, c, pts, sorted, r.clone(), above, out)?;
            runs.push(out.slice(0, k));
        }
        m.barrier(group);
        Ok(())
    })?;
    runs.reverse();
    Ok(concat_runs(m, group, &runs)?)
}
