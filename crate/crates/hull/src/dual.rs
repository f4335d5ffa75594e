//! Polar duality about a centre `o`: the constraint `q . (x - o) <= 1` and
//! the point `o + q` are duals of each other. Incidence is preserved in both
//! directions, and the dual of the dual is the original (constraints up to a
//! positive factor).

use crate::geom::{HalfPlane, HullChain, Point2};
use crate::seqhull::{pole, vertices_from_poles};
use crate::{HullError, HullResult};

/// Dual points of `planes`; each plane must contain `o` strictly.
pub fn dualize(planes: &[HalfPlane], o: &Point2) -> HullResult<Vec<Point2>> {
    planes.iter().enumerate().map(|(i, h)| pole(h, o).map(|d| d.add(o)).ok_or(HullError::Infeasible(i))).collect()
}

/// Dual constraints of `points`; no point may equal `o`.
pub fn dualize_vertices(points: &[Point2], o: &Point2) -> HullResult<Vec<HalfPlane>> {
    points
        .iter()
        .map(|v| {
            let q = v.sub(o);
            let c = crate::geom::one() + q.dot(o);
            HalfPlane::new(q.x, q.y, c)
        })
        .collect()
}

/// The convex polygon whose dual constraints intersect in `chain`: one vertex
/// per edge of `chain`. `o` must lie strictly inside `chain`.
pub fn undualize_chain(chain: &HullChain, o: &Point2) -> HullResult<HullChain> {
    let rel: Vec<Point2> = chain.vertices.iter().map(|v| v.sub(o)).collect();
    vertices_from_poles(&rel, o)
}
