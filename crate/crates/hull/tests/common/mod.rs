#![allow(dead_code)]

use num::{BigInt, BigRational, Signed, Zero};
use pem_hull::{HalfPlane, Point2, Q};
use pem_machine::{Machine, MachineConfig, MemRegion, Word};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn machine(p: usize, m: usize, b: usize) -> Machine {
    Machine::new(MachineConfig::new(p, m, b).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn r(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn pt(x: i64, y: i64) -> Point2 {
    Point2::int(x, y)
}

pub fn handles(m: &mut Machine, n: usize) -> MemRegion {
    m.alloc_from(&(0..n as Word).collect::<Vec<_>>())
}

pub fn points_of(m: &Machine, pts: &[Point2], r: MemRegion) -> Vec<Point2> {
    m.snapshot_memory(r).unwrap().into_iter().map(|h| pts[h as usize].clone()).collect()
}

pub fn sorted(mut v: Vec<Point2>) -> Vec<Point2> {
    v.sort();
    v
}

fn cross(o: &Point2, a: &Point2, b: &Point2) -> Q {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// Points not strictly dominated in both coordinates by any other.
pub fn dominance_oracle(pts: &[Point2]) -> Vec<Point2> {
    sorted(pts.iter().filter(|q| !pts.iter().any(|p| p.x > q.x && p.y > q.y)).cloned().collect())
}

/// Hull vertices by gift wrapping: from the lowest-leftmost point, repeatedly
/// take the point with every other point to its left, farthest on ties.
/// Returned counterclockwise from the lexicographically smallest vertex.
pub fn gift_wrap(pts: &[Point2]) -> Vec<Point2> {
    let mut uniq = pts.to_vec();
    uniq.sort();
    uniq.dedup();
    if uniq.len() < 3 {
        return uniq;
    }
    let start = uniq.iter().min_by(|a, b| (&a.y, &a.x).cmp(&(&b.y, &b.x))).unwrap().clone();
    let dist = |a: &Point2, b: &Point2| {
        let dx = &a.x - &b.x;
        let dy = &a.y - &b.y;
        &dx * &dx + &dy * &dy
    };
    let mut hull = vec![start.clone()];
    let mut cur = start.clone();
    loop {
        let mut cand = if uniq[0] == cur { uniq[1].clone() } else { uniq[0].clone() };
        for p in &uniq {
            if *p == cur {
                continue;
            }
            let c = cross(&cur, &cand, p);
            if c.is_negative() || (c.is_zero() && dist(&cur, p) > dist(&cur, &cand)) {
                cand = p.clone();
            }
        }
        if cand == start {
            break;
        }
        hull.push(cand.clone());
        cur = cand;
        if hull.len() > uniq.len() {
            panic!("gift wrapping did not close");
        }
    }
    if hull.len() == 2 || uniq.iter().all(|p| cross(&hull[0], &hull[1], p).is_zero()) {
        return sorted(vec![uniq[0].clone(), uniq[uniq.len() - 1].clone()]);
    }
    let first = (0..hull.len()).min_by(|&i, &j| hull[i].cmp(&hull[j])).unwrap();
    hull.rotate_left(first);
    hull
}

/// Intersection of `planes` with the box `[-r, r]^2` by successive clipping
/// of a polygon; vertices counterclockwise, collinear ones dropped.
pub fn clip_oracle(planes: &[HalfPlane], bound: i64) -> Vec<Point2> {
    let mut poly = vec![pt(-bound, -bound), pt(bound, -bound), pt(bound, bound), pt(-bound, bound)];
    for h in planes {
        let mut next = Vec::new();
        let k = poly.len();
        for i in 0..k {
            let (a, b) = (&poly[i], &poly[(i + 1) % k]);
            let (ea, eb) = (h.eval(a), h.eval(b));
            if !ea.is_positive() {
                next.push(a.clone());
            }
            if (ea.is_negative() && eb.is_positive()) || (ea.is_positive() && eb.is_negative()) {
                let t = &ea / (&ea - &eb);
                next.push(Point2::new(&a.x + &t * (&b.x - &a.x), &a.y + &t * (&b.y - &a.y)));
            }
        }
        next.dedup();
        while next.len() > 1 && next.first() == next.last() {
            next.pop();
        }
        poly = next;
        if poly.is_empty() {
            break;
        }
    }
    // Drop collinear vertices.
    loop {
        let k = poly.len();
        if k < 3 {
            break;
        }
        let Some(i) = (0..k).find(|&i| cross(&poly[(i + k - 1) % k], &poly[i], &poly[(i + 1) % k]).is_zero()) else {
            break;
        };
        poly.remove(i);
    }
    poly
}

/// Random constraints `a x + b y <= c` with small integer coefficients and
/// `c > 0` (so the origin is strictly inside), redrawn until bounded.
pub fn random_planes(n: usize, seed: u64) -> Vec<HalfPlane> {
    let mut g = rng(seed);
    loop {
        let planes: Vec<HalfPlane> = (0..n)
            .map(|_| loop {
                let a = g.random_range(-50..=50);
                let b = g.random_range(-50..=50);
                if a != 0 || b != 0 {
                    break HalfPlane::int(a, b, g.random_range(1..=100));
                }
            })
            .collect();
        if is_bounded(&planes) {
            return planes;
        }
    }
}

pub const BOX: i64 = 1_000_000;

pub fn is_bounded(planes: &[HalfPlane]) -> bool {
    let poly = clip_oracle(planes, BOX);
    let lim = Q::from_integer(BigInt::from(BOX));
    !poly.is_empty() && poly.iter().all(|p| p.x.abs() < lim && p.y.abs() < lim)
}

/// Rational point on the unit circle for parameter `t`.
pub fn circle_point(t: &Q) -> Point2 {
    let one = Q::from_integer(BigInt::from(1));
    let d = &one + t * t;
    Point2::new((&one - t * t) / &d, (Q::from_integer(BigInt::from(2)) * t) / &d)
}

/// Counterclockwise angular order from the positive x-axis.
fn by_angle(a: &Point2, b: &Point2) -> std::cmp::Ordering {
    let half = |p: &Point2| !(p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()));
    half(a).cmp(&half(b)).then_with(|| Q::zero().cmp(&(&a.x * &b.y - &a.y * &b.x)))
}

/// Tangent constraints `t . x <= 1` sorted by angle, duplicates removed.
fn tangents_by_angle(planes: &[HalfPlane]) -> Vec<Point2> {
    let mut n: Vec<Point2> = planes.iter().map(|p| Point2::new(p.a.clone(), p.b.clone())).collect();
    n.sort_by(by_angle);
    n.dedup();
    n
}

/// Whether tangents of the unit circle bound a polygon: consecutive normals
/// turn by less than a half turn.
pub fn tangents_bounded(planes: &[HalfPlane]) -> bool {
    let n = tangents_by_angle(planes);
    let k = n.len();
    k >= 3 && (0..k).all(|i| (&n[i].x * &n[(i + 1) % k].y - &n[i].y * &n[(i + 1) % k].x).is_positive())
}

/// Vertices of a bounded set of unit-circle tangents: every tangent gives an
/// edge, so consecutive tangents meet at the vertices.
pub fn tangent_oracle(planes: &[HalfPlane]) -> Vec<Point2> {
    let n = tangents_by_angle(planes);
    let k = n.len();
    let out = (0..k)
        .map(|i| {
            let (u, w) = (&n[i], &n[(i + 1) % k]);
            let det = &u.x * &w.y - &u.y * &w.x;
            Point2::new((&w.y - &u.y) / &det, (&u.x - &w.x) / &det)
        })
        .collect();
    sorted(out)
}

/// `n` tangent constraints of the unit circle at random rational points.
pub fn tangent_planes(n: usize, seed: u64) -> Vec<HalfPlane> {
    let mut g = rng(seed);
    loop {
        let planes: Vec<HalfPlane> = (0..n)
            .map(|_| {
                let t = r(g.random_range(-4000..4000), g.random_range(1..1000));
                let p = circle_point(&t);
                HalfPlane::new(p.x, p.y, Q::from_integer(BigInt::from(1))).unwrap()
            })
            .collect();
        if tangents_bounded(&planes) {
            return planes;
        }
    }
}

pub fn random_points(n: usize, range: i64, seed: u64) -> Vec<Point2> {
    let mut g = rng(seed);
    (0..n).map(|_| pt(g.random_range(-range..=range), g.random_range(-range..=range))).collect()
}
