//! Brute-force intersection: every pairwise meeting point of boundary lines
//! is tested against every plane.

use std::cmp::Ordering;

use num::Signed;
use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_merge::concat_runs;
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{seq_sort, PemRng};

use crate::geom::{HalfPlane, HullChain, Point2};
use crate::seqhull::intersect_exact;
use crate::split::split_upper_lower;
use crate::util::{get, put};
use crate::{HullError, HullResult};

fn pair_of(k: usize, n: usize) -> (usize, usize) {
    // Row-major upper triangle: row i holds pairs (i, i+1..n).
    let mut i = 0;
    let mut k = k;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// Intersection of the planes named by `handles`, which must contain
/// `interior` strictly and bound a polygon. All `n^2 / 2` candidate vertices
/// are spread over the cores and each is checked against all `n` planes;
/// feasible ones are compacted, split into upper and lower sets, sorted by x
/// and chained counterclockwise.
pub fn halfplane_brute(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    rng: &mut PemRng,
) -> HullResult<HullChain> {
    let n = handles.len;
    let b = m.config().b;
    with_scratch(m, |m| -> HullResult<HullChain> {
        let c0 = group.core(0);
        let hs = get(m, c0, handles)?;
        for &h in &hs {
            m.work(c0, 1);
            if !planes[h as usize].contains_strictly(interior) {
                return Err(HullError::Infeasible(h as usize));
            }
        }
        let local: Vec<HalfPlane> = hs.iter().map(|&h| planes[h as usize].clone()).collect();
        // Boundedness is a property of the input, not of the search below.
        intersect_exact(&local, interior)?;

        let pairs = n * n.saturating_sub(1) / 2;
        let slots = m.alloc(pairs);
        let g = group.fit(pairs * n, m.config().m).take(pairs / b.max(1));
        let mut found: Vec<Point2> = Vec::new();
        let mut runs = Vec::new();
        let staged = m.alloc(pairs);
        for (ci, r) in block_chunks(slots, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            let mut k = 0;
            for s in r.clone() {
                let (i, j) = pair_of(s, n);
                let hi = m.rd(c, handles, i)? as usize;
                let hj = m.rd(c, handles, j)? as usize;
                m.work(c, 1);
                let Some(v) = planes[hi].meet(&planes[hj]) else { continue };
                let mut feasible = true;
                for t in 0..n {
                    let ht = m.rd(c, handles, t)? as usize;
                    m.work(c, 1);
                    if planes[ht].eval(&v).is_positive() {
                        feasible = false;
                        break;
                    }
                }
                if feasible {
                    m.wr(c, staged, r.start + k, found.len() as Word)?;
                    found.push(v);
                    k += 1;
                }
            }
            runs.push(staged.slice(r.start, k));
        }
        m.barrier(group);
        let cand = concat_runs(m, group, &runs)?;

        // Deduplicate after sorting by coordinates.
        let by_xy = |a: Word, b: Word| (&found[a as usize], a) < (&found[b as usize], b);
        let sorted = seq_sort(m, c0, cand, &by_xy, rng)?;
        let mut uniq = Vec::new();
        for i in 0..sorted.len {
            let h = m.rd(c0, sorted, i)?;
            m.work(c0, 1);
            if uniq.last().is_none_or(|&l: &Word| found[l as usize] != found[h as usize]) {
                uniq.push(h);
            }
        }
        let uniq = put(m, c0, &uniq)?;
        m.barrier(group);
        let (up, down) = split_upper_lower(m, group, &found, uniq)?;
        let up = seq_sort(m, c0, up, &by_xy, rng)?;
        let down = seq_sort(m, c0, down, &by_xy, rng)?;
        m.barrier(group);
        let up = get(m, c0, up)?;
        let down = get(m, c0, down)?;
        // Leftmost-topmost first, along the lower set, then back along the top.
        let mut chain: Vec<Point2> = Vec::with_capacity(up.len() + down.len());
        if let Some(&first) = up.iter().min_by(|&&a, &&b| {
            found[a as usize].x.cmp(&found[b as usize].x).then(found[b as usize].y.cmp(&found[a as usize].y))
        }) {
            chain.push(found[first as usize].clone());
            chain.extend(down.iter().map(|&h| found[h as usize].clone()));
            let mut rest: Vec<Word> = up.into_iter().filter(|&h| h != first).collect();
            rest.sort_by(|&a, &b| match found[b as usize].x.cmp(&found[a as usize].x) {
                Ordering::Equal => found[a as usize].y.cmp(&found[b as usize].y),
                o => o,
            });
            chain.extend(rest.iter().map(|&h| found[h as usize].clone()));
        }
        Ok(HullChain::from_ccw(chain))
    })
}
