//! Dropping planes dominated inside a sector.
//!
//! With `O` the sector's apex and `u`, `w` its ray directions, a point of the
//! wedge is `s u + t w` with `s, t >= 0`, and a plane with pole `d` (about
//! `O`) holds there when `s (d.u) + t (d.w) <= 1`. So if `d_B.u >= d_A.u` and
//! `d_B.w >= d_A.w`, every wedge point satisfying `B` satisfies `A`, and `A`
//! can go. For a plane crossing a ray, `d.u` is the inverse of the crossing
//! distance; planes missing a ray get a non-positive score on it and are
//! ranked by the same formula.

use num::Signed;
use pem_machine::{Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_merge::BucketedRun;
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{allocate_cores, PemRng};

use crate::geom::{HalfPlane, Point2, Sector, Q};
use crate::maxima::maxima_par;
use crate::seqhull::pole;
use crate::util::{fill, sort_region};
use crate::{HullError, HullResult};

/// `rank[sorted[i]] = i`, one chunk of positions per core.
fn ranks(m: &mut Machine, group: Cores, sorted: MemRegion) -> HullResult<MemRegion> {
    let n = sorted.len;
    let out = m.alloc(n);
    let b = m.config().b;
    let g = group.fit(n, b);
    for (ci, r) in block_chunks(sorted, g.len, b).into_iter().enumerate() {
        let c = g.core(ci);
        for i in r {
            let h = m.rd(c, sorted, i)?;
            m.wr(c, out, h as usize, i as Word)?;
        }
    }
    m.barrier(group);
    Ok(out)
}

/// Planes of `handles` not dominated inside `sector`.
///
/// Planes are ranked by their score on each ray (higher is tighter). A tie
/// on one ray is broken against the plane scoring higher on the other, and a
/// tie on both by plane index in opposite directions, so a plane is dropped
/// only when another scores strictly higher on both rays. Planes touching
/// the intersection inside the closed wedge always survive. The survivors
/// are the maxima of the rank pairs.
pub fn filter_sector(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    sector: &Sector,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let n = handles.len;
    let out = m.alloc(n);
    if n <= 1 {
        pem_primitives::util::par_copy(m, group, handles, out)?;
        return Ok(out);
    }
    let hs = m.snapshot_memory(handles)?;
    let mut score_lo: Vec<Q> = Vec::with_capacity(n);
    let mut score_hi: Vec<Q> = Vec::with_capacity(n);
    for &h in &hs {
        let d = pole(&planes[h as usize], &sector.apex).ok_or(HullError::Infeasible(h as usize))?;
        score_lo.push(d.dot(&sector.ray_lo));
        score_hi.push(d.dot(&sector.ray_hi));
    }
    let missing = (0..n).filter(|&i| !score_lo[i].is_positive() || !score_hi[i].is_positive()).count();
    if missing > 0 {
        m.diagnose(
            DiagnosticKind::Note,
            format!("sector {}: {missing} of {n} planes miss a ray and are ranked by extension", sector.index),
        );
    }
    let k = with_scratch(m, |m| -> HullResult<usize> {
        let local = m.alloc(n);
        fill(m, group, local, |m, c, i| {
            m.rd(c, handles, i)?;
            m.work(c, 2);
            Ok(i as Word)
        })?;
        use std::cmp::Reverse;
        let lo_order = |a: Word, b: Word| {
            let (a, b) = (a as usize, b as usize);
            (&score_lo[a], Reverse(&score_hi[a]), Reverse(hs[a]))
                < (&score_lo[b], Reverse(&score_hi[b]), Reverse(hs[b]))
        };
        let hi_order = |a: Word, b: Word| {
            let (a, b) = (a as usize, b as usize);
            (&score_hi[a], Reverse(&score_lo[a]), hs[a]) < (&score_hi[b], Reverse(&score_lo[b]), hs[b])
        };
        let by_lo = sort_region(m, group, local, &lo_order, rng)?;
        let by_hi = sort_region(m, group, local, &hi_order, rng)?;
        let rank_lo = ranks(m, group, by_lo)?;
        let rank_hi = ranks(m, group, by_hi)?;
        let mut pts = vec![Point2::origin(); n];
        fill(m, group, local, |m, c, i| {
            let x = m.rd(c, rank_lo, i)?;
            let y = m.rd(c, rank_hi, i)?;
            pts[i] = Point2::int(x, y);
            Ok(i as Word)
        })?;
        let keep = maxima_par(m, group, &pts, local, rng)?;
        fill(m, group, out.slice(0, keep.len), |m, c, i| Ok(hs[m.rd(c, keep, i)? as usize]))?;
        Ok(keep.len)
    })?;
    Ok(out.slice(0, k))
}

/// [`filter_sector`] on every group, each on cores in proportion to its
/// size. Empty groups stay empty.
pub fn filter_all(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    groups: &BucketedRun,
    sectors: &[Sector],
    rng: &mut PemRng,
) -> HullResult<Vec<MemRegion>> {
    let t = groups.buckets();
    let sizes: Vec<usize> = (0..t).map(|j| groups.bucket_len(j)).collect();
    let cores = allocate_cores(m, group, &sizes)?;
    let mut out = Vec::with_capacity(t);
    for j in 0..t {
        if sizes[j] == 0 {
            out.push(MemRegion::new(groups.data.base, 0));
            continue;
        }
        out.push(filter_sector(m, cores[j], planes, groups.bucket(j), &sectors[j], rng)?);
    }
    m.barrier(group);
    Ok(out)
}
