//! Which sectors each plane cuts, and regrouping the planes by sector.
//!
//! Around an interior point `O` and a convex polygon `P_0 .. P_{m-1}`
//! containing it, sector `k` is the wedge from `P_k` to `P_{k+1}`. A plane
//! cuts sector `k` when it strictly excludes `P_k` or `P_{k+1}`; otherwise it
//! contains the whole triangle `O P_k P_{k+1}`. The excluded vertices of a
//! plane are consecutive, so the sectors it cuts form a circular interval.

use pem_machine::{Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_merge::BucketedRun;
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{prefix_sum, PemRng};

use crate::arrangement::{locate_points, preprocess_arrangement};
use crate::geom::{HalfPlane, HullChain, Point2};
use crate::seqhull::pole;
use crate::util::{fill, sort_region};
use crate::{HullError, HullResult};

/// Sectors `start, start + 1, ..., start + len - 1`, modulo the sector count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SectorInterval {
    pub start: usize,
    pub len: usize,
}

impl SectorInterval {
    pub const EMPTY: SectorInterval = SectorInterval { start: 0, len: 0 };

    pub fn sectors(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start + i) % m)
    }

    /// Smallest circular interval containing every `true` sector; the
    /// longest circular gap is left out (the first one on ties).
    pub fn covering(cut: &[bool]) -> Self {
        let m = cut.len();
        let count = cut.iter().filter(|&&c| c).count();
        if count == 0 {
            return Self::EMPTY;
        }
        if count == m {
            return SectorInterval { start: 0, len: m };
        }
        let (mut best, mut best_end, mut run) = (0, 0, 0);
        for i in 0..2 * m {
            if cut[i % m] {
                run = 0;
            } else {
                run += 1;
                if run > best && run <= m {
                    best = run;
                    best_end = (i + 1) % m;
                }
            }
        }
        SectorInterval { start: best_end, len: m - best }
    }

    /// Sectors next to the `true` vertices: vertex `k` borders sectors
    /// `k - 1` and `k`.
    pub fn covering_vertices(excluded: &[bool]) -> Self {
        let m = excluded.len();
        let mut cut = vec![false; m];
        for k in (0..m).filter(|&k| excluded[k]) {
            cut[k] = true;
            cut[(k + m - 1) % m] = true;
        }
        Self::covering(&cut)
    }
}

/// The dual lines of a polygon's vertices in pole coordinates about `o`:
/// the pole of a plane violates line `k` exactly when the plane strictly
/// excludes vertex `k`.
pub(crate) fn vertex_lines(chain: &HullChain, o: &Point2) -> Vec<HalfPlane> {
    chain
        .vertices
        .iter()
        .map(|v| {
            let r = v.sub(o);
            HalfPlane { a: r.x, b: r.y, c: crate::geom::one() }
        })
        .collect()
}

/// Per plane of `handles`, the interval of sectors of `chain` (around
/// `interior`) it cuts, as `start, len` word pairs in input order.
///
/// Planes become poles, the polygon's vertices become lines in the pole
/// plane, and the poles are located in that arrangement; each region stores
/// its interval.
#[allow(clippy::too_many_arguments)]
pub fn find_sectors(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    chain: &HullChain,
    x: u32,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let n = handles.len;
    let out = m.alloc(2 * n);
    // Poles, indexed by position.
    let snapshot = m.snapshot_memory(handles)?;
    let poles = snapshot
        .iter()
        .map(|&h| pole(&planes[h as usize], interior).ok_or(HullError::Infeasible(h as usize)))
        .collect::<HullResult<Vec<_>>>()?;
    with_scratch(m, |m| -> HullResult<()> {
        let arr = preprocess_arrangement(m, group, &vertex_lines(chain, interior))?;
        if arr.is_rotated() {
            m.diagnose(DiagnosticKind::Note, "sector arrangement rotated to avoid vertical lines".into());
        }
        let local = m.alloc(n);
        fill(m, group, local, |m, c, i| {
            m.rd(c, handles, i)?;
            Ok(i as Word)
        })?;
        let regions = locate_points(m, group, &poles, local, &arr, x, rng)?;
        let b = m.config().b;
        let g = group.fit(2 * n, b);
        for (ci, r) in block_chunks(out, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            for at in r {
                let reg = m.rd(c, regions, at / 2)? as usize;
                let v = m.rd(c, arr.interval_table, 2 * reg + at % 2)?;
                m.wr(c, out, at, v)?;
            }
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(out)
}

/// Copies of every plane, one per sector it cuts, grouped by sector.
///
/// Each core counts the copies of its chunk; the prefix sums of the counts
/// give write offsets; copies are written as `sector * stride + handle` and
/// sorted, and the group boundaries found by binary search. `stride` must
/// exceed every handle. Exceeding `a n` copies is recorded as a diagnostic.
#[allow(clippy::too_many_arguments)]
pub fn expand_by_sector(
    m: &mut Machine,
    group: Cores,
    handles: MemRegion,
    intervals: MemRegion,
    sectors: usize,
    stride: usize,
    a: f64,
    rng: &mut PemRng,
) -> HullResult<BucketedRun> {
    let n = handles.len;
    let b = m.config().b;
    let g = group.fit(n, b);
    let chunks = block_chunks(handles, g.len, b);
    // Totals first, so the output can be allocated before any scratch.
    let lens = m.snapshot_memory(intervals)?;
    let total: usize = (0..n).map(|i| lens[2 * i + 1] as usize).sum();
    if total as f64 > a * n as f64 {
        m.diagnose(DiagnosticKind::Note, format!("expansion {total} exceeds a n = {:.0}", a * n as f64));
    }
    let out = m.alloc(total);
    let mut bounds = vec![0usize; sectors + 1];
    with_scratch(m, |m| -> HullResult<()> {
        let counts = m.alloc(g.len);
        for (ci, r) in chunks.iter().enumerate() {
            let c = g.core(ci);
            let mut k = 0;
            for i in r.clone() {
                k += m.rd(c, intervals, 2 * i + 1)?;
            }
            m.wr(c, counts, ci, k)?;
        }
        m.barrier(group);
        let ends = prefix_sum(m, group, counts)?;
        let tags = m.alloc(total);
        for (ci, r) in chunks.iter().enumerate() {
            let c = g.core(ci);
            let mut at = if ci == 0 { 0 } else { m.rd(c, ends, ci - 1)? as usize };
            for i in r.clone() {
                let h = m.rd(c, handles, i)?;
                let start = m.rd(c, intervals, 2 * i)? as usize;
                let len = m.rd(c, intervals, 2 * i + 1)? as usize;
                for j in 0..len {
                    let s = (start + j) % sectors;
                    m.wr(c, tags, at, (s * stride) as Word + h)?;
                    at += 1;
                }
            }
        }
        m.barrier(group);
        let sorted = sort_region(m, group, tags, &pem_primitives::Natural, rng)?;
        // Group boundaries: first tag of each sector.
        let gb = group.fit(sectors, 1);
        for (ci, r) in pem_machine::chunk_ranges(sectors + 1, gb.len).into_iter().enumerate() {
            let c = gb.core(ci);
            for s in r {
                let key = (s * stride) as Word;
                let (mut lo, mut hi) = (0, total);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if m.rd(c, sorted, mid)? < key {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                bounds[s] = lo;
            }
        }
        m.barrier(group);
        fill(m, group, out, |m, c, i| Ok(m.rd(c, sorted, i)? % stride as Word))?;
        Ok(())
    })?;
    bounds[sectors] = total;
    Ok(BucketedRun { data: out, bounds })
}
