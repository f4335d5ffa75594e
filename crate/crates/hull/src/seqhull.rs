//! Sequential intersection of half-planes around a known interior point.
//!
//! Centred on the interior point `O`, the constraint `a x + b y <= c'` with
//! `c' > 0` has pole `(a, b) / c'`. The intersection is bounded exactly when
//! `O` lies strictly inside the convex hull of the poles; hull vertices are
//! the planes that contribute edges, and consecutive hull vertices meet at
//! the polygon's vertices, in the same counterclockwise order.

use std::cmp::Ordering;

use num::Signed;
use pem_machine::{Cores, Machine, MemRegion, Word};
use pem_primitives::{seq_sort, PemRng};

use crate::geom::{orient, HalfPlane, HullChain, Point2};
use crate::{HullError, HullResult};

/// Pole of `h` about `o`; `None` when `o` is not strictly inside `h`.
pub(crate) fn pole(h: &HalfPlane, o: &Point2) -> Option<Point2> {
    let c = -h.eval(o);
    c.is_positive().then(|| Point2::new(&h.a / &c, &h.b / &c))
}

/// The point `v` with `d1 . v = 1` and `d2 . v = 1`.
pub(crate) fn polar_meet(d1: &Point2, d2: &Point2) -> Point2 {
    let det = d1.cross(d2);
    Point2::new((&d2.y - &d1.y) / &det, (&d1.x - &d2.x) / &det)
}

/// Polygon vertices from counterclockwise hull poles, shifted back by `o`.
pub(crate) fn vertices_from_poles(hull: &[Point2], o: &Point2) -> HullResult<HullChain> {
    let k = hull.len();
    let origin = Point2::origin();
    if k < 3 || (0..k).any(|i| orient(&hull[i], &hull[(i + 1) % k], &origin) != Ordering::Greater) {
        return Err(HullError::Unbounded);
    }
    let v = (0..k).map(|i| polar_meet(&hull[i], &hull[(i + 1) % k]).add(o)).collect();
    Ok(HullChain::from_ccw(v))
}

/// Monotone-chain hull of sorted distinct-or-repeated points, counterclockwise,
/// without collinear vertices. Indices into `pts`.
pub(crate) fn monotone_chain(pts: &[Point2], sorted: &[usize]) -> Vec<usize> {
    let mut st: Vec<usize> = Vec::with_capacity(sorted.len() + 1);
    for pass in 0..2 {
        let base = st.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(sorted.iter()) } else { Box::new(sorted.iter().rev()) };
        for &i in iter {
            while st.len() >= base + 2
                && orient(&pts[st[st.len() - 2]], &pts[st[st.len() - 1]], &pts[i]) != Ordering::Greater
            {
                st.pop();
            }
            st.push(i);
        }
        st.pop();
    }
    st
}

/// Host-side intersection, for checks and tiny inputs.
pub fn intersect_exact(planes: &[HalfPlane], interior: &Point2) -> HullResult<HullChain> {
    let poles = planes
        .iter()
        .enumerate()
        .map(|(i, h)| pole(h, interior).ok_or(HullError::Infeasible(i)))
        .collect::<HullResult<Vec<_>>>()?;
    let mut idx: Vec<usize> = (0..poles.len()).collect();
    idx.sort_by(|&i, &j| poles[i].cmp(&poles[j]));
    let hull: Vec<Point2> = monotone_chain(&poles, &idx).into_iter().map(|i| poles[i].clone()).collect();
    vertices_from_poles(&hull, interior)
}

/// Intersection of the planes named by `handles`, on one core: poles are
/// sorted with the sequential sort and the monotone chain keeps its stack in
/// machine memory. Also returns the handles of the edge-contributing planes.
pub fn intersect_seq(
    m: &mut Machine,
    core: usize,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    rng: &mut PemRng,
) -> HullResult<(HullChain, Vec<Word>)> {
    let n = handles.len;
    let mark = m.mark();
    let res = (|| {
        let mut hs = Vec::with_capacity(n);
        let mut poles = Vec::with_capacity(n);
        let local = m.alloc(n);
        for i in 0..n {
            let h = m.rd(core, handles, i)?;
            m.work(core, 1);
            let d = pole(&planes[h as usize], interior).ok_or(HullError::Infeasible(h as usize))?;
            hs.push(h);
            poles.push(d);
            m.wr(core, local, i, i as Word)?;
        }
        let by_pole = |a: Word, b: Word| (&poles[a as usize], a) < (&poles[b as usize], b);
        let sorted = seq_sort(m, core, local, &by_pole, rng)?;
        let stack = m.alloc(n + 1);
        let mut top = 0usize;
        for pass in 0..2 {
            let base = top;
            for step in 0..n {
                let i = if pass == 0 { step } else { n - 1 - step };
                let p = m.rd(core, sorted, i)? as usize;
                while top >= base + 2 {
                    let a = m.rd(core, stack, top - 2)? as usize;
                    let b = m.rd(core, stack, top - 1)? as usize;
                    m.work(core, 1);
                    if orient(&poles[a], &poles[b], &poles[p]) == Ordering::Greater {
                        break;
                    }
                    top -= 1;
                }
                m.wr(core, stack, top, p as Word)?;
                top += 1;
            }
            top = top.saturating_sub(1);
        }
        let ids: Vec<usize> = (0..top).map(|i| Ok(m.rd(core, stack, i)? as usize)).collect::<HullResult<_>>()?;
        m.work(core, 2 * ids.len() as u64);
        let hull: Vec<Point2> = ids.iter().map(|&i| poles[i].clone()).collect();
        let chain = vertices_from_poles(&hull, interior)?;
        Ok((chain, ids.iter().map(|&i| hs[i]).collect()))
    })();
    m.release(mark);
    m.barrier(Cores::one(core));
    res
}
