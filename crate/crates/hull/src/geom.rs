//! Exact rational geometry: points, half-planes, sectors and convex chains.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::HullError;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point2 {
    pub x: Q,
    pub y: Q,
}

impl Point2 {
    pub fn new(x: Q, y: Q) -> Self {
        Point2 { x, y }
    }

    pub fn int(x: i64, y: i64) -> Self {
        Point2 { x: q(x), y: q(y) }
    }

    pub fn origin() -> Self {
        Point2 { x: Q::zero(), y: Q::zero() }
    }

    pub fn sub(&self, o: &Point2) -> Point2 {
        Point2 { x: &self.x - &o.x, y: &self.y - &o.y }
    }

    pub fn add(&self, o: &Point2) -> Point2 {
        Point2 { x: &self.x + &o.x, y: &self.y + &o.y }
    }

    pub fn dot(&self, o: &Point2) -> Q {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn cross(&self, o: &Point2) -> Q {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

/// Sign of the turn a -> b -> c: positive for counterclockwise.
pub fn orient(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    b.sub(a).cross(&c.sub(a)).cmp(&Q::zero())
}

/// The constraint `a x + b y <= c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfPlane {
    pub a: Q,
    pub b: Q,
    pub c: Q,
}

impl HalfPlane {
    pub fn new(a: Q, b: Q, c: Q) -> Result<Self, HullError> {
        if a.is_zero() && b.is_zero() {
            return Err(HullError::Degenerate("half-plane with zero normal".into()));
        }
        Ok(HalfPlane { a, b, c })
    }

    pub fn int(a: i64, b: i64, c: i64) -> Self {
        Self::new(q(a), q(b), q(c)).expect("nonzero normal")
    }

    /// `a x + b y - c`: negative strictly inside, zero on the boundary.
    pub fn eval(&self, p: &Point2) -> Q {
        &self.a * &p.x + &self.b * &p.y - &self.c
    }

    pub fn contains(&self, p: &Point2) -> bool {
        !self.eval(p).is_positive()
    }

    pub fn contains_strictly(&self, p: &Point2) -> bool {
        self.eval(p).is_negative()
    }

    /// Where the two boundary lines meet, if they are not parallel.
    pub fn meet(&self, o: &HalfPlane) -> Option<Point2> {
        let det = &self.a * &o.b - &o.a * &self.b;
        if det.is_zero() {
            return None;
        }
        let x = (&self.c * &o.b - &o.c * &self.b) / &det;
        let y = (&self.a * &o.c - &o.a * &self.c) / &det;
        Some(Point2 { x, y })
    }

    /// The same constraint in coordinates centred on `o`.
    pub fn relative_to(&self, o: &Point2) -> HalfPlane {
        HalfPlane { a: self.a.clone(), b: self.b.clone(), c: -self.eval(o) }
    }
}

impl fmt::Display for HalfPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.a, self.b, self.c)
    }
}

/// The wedge at `apex` from direction `ray_lo` counterclockwise to `ray_hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    pub apex: Point2,
    pub ray_lo: Point2,
    pub ray_hi: Point2,
    pub index: usize,
}

impl Sector {
    /// One sector per edge of a convex chain around an interior point.
    pub fn fan(apex: &Point2, chain: &HullChain) -> Vec<Sector> {
        let v = &chain.vertices;
        (0..v.len())
            .map(|k| Sector {
                apex: apex.clone(),
                ray_lo: v[k].sub(apex),
                ray_hi: v[(k + 1) % v.len()].sub(apex),
                index: k,
            })
            .collect()
    }

    /// Whether `p` lies in the closed wedge.
    pub fn contains(&self, p: &Point2) -> bool {
        let d = p.sub(&self.apex);
        !self.ray_lo.cross(&d).is_negative() && !d.cross(&self.ray_hi).is_negative()
    }
}

/// A convex polygon, counterclockwise, starting at its lexicographically
/// smallest vertex, with no repeated or collinear vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HullChain {
    pub vertices: Vec<Point2>,
}

impl HullChain {
    /// Canonical form of a counterclockwise cyclic vertex sequence.
    pub fn from_ccw(mut v: Vec<Point2>) -> Self {
        v.dedup();
        while v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        if v.len() >= 3 {
            let mut changed = true;
            while changed && v.len() >= 3 {
                changed = false;
                let k = v.len();
                for i in 0..k {
                    let (a, b, c) = (&v[(i + k - 1) % k], &v[i], &v[(i + 1) % k]);
                    if orient(a, b, c) == Ordering::Equal {
                        v.remove(i);
                        changed = true;
                        break;
                    }
                }
            }
        }
        if let Some(start) = (0..v.len()).min_by(|&i, &j| v[i].cmp(&v[j])) {
            v.rotate_left(start);
        }
        HullChain { vertices: v }
    }

    /// Canonical chain of a vertex set in convex position, ordered by angle
    /// around `centre`, which must lie strictly inside.
    pub fn around(centre: &Point2, mut v: Vec<Point2>) -> Self {
        v.sort();
        v.dedup();
        v.sort_by(|a, b| angle_cmp(&a.sub(centre), &b.sub(centre)));
        Self::from_ccw(v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Counterclockwise turn at every vertex.
    pub fn is_strictly_convex(&self) -> bool {
        let v = &self.vertices;
        let k = v.len();
        k < 3 || (0..k).all(|i| orient(&v[i], &v[(i + 1) % k], &v[(i + 2) % k]) == Ordering::Greater)
    }

    /// Whether `p` is strictly inside.
    pub fn contains_strictly(&self, p: &Point2) -> bool {
        let v = &self.vertices;
        let k = v.len();
        k >= 3 && (0..k).all(|i| orient(&v[i], &v[(i + 1) % k], p) == Ordering::Greater)
    }

    /// One "x y" line per vertex.
    pub fn to_text(&self) -> String {
        self.vertices.iter().map(|p| format!("{p}\n")).collect()
    }
}

/// Counterclockwise angular order of nonzero vectors, starting from the
/// positive x-axis.
pub fn angle_cmp(a: &Point2, b: &Point2) -> Ordering {
    let half = |p: &Point2| -> u8 {
        if p.y.is_positive() || (p.y.is_zero() && p.x.is_positive()) {
            0
        } else {
            1
        }
    };
    half(a).cmp(&half(b)).then_with(|| Q::zero().cmp(&a.cross(b)))
}

pub fn parse_q(s: &str) -> Result<Q, HullError> {
    Q::from_str(s.trim()).map_err(|_| HullError::Parse(format!("not a rational: {s:?}")))
}

/// Points file: one "x y" pair per line; blank lines and `#` comments skipped.
pub fn parse_points(text: &str) -> Result<Vec<Point2>, HullError> {
    fields(text, 2).map(|f| Ok(Point2::new(parse_q(f[0])?, parse_q(f[1])?))).collect()
}

/// Half-planes file: one "a b c" triple per line, meaning `a x + b y <= c`.
pub fn parse_planes(text: &str) -> Result<Vec<HalfPlane>, HullError> {
    fields(text, 3).map(|f| HalfPlane::new(parse_q(f[0])?, parse_q(f[1])?, parse_q(f[2])?)).collect()
}

fn fields(text: &str, k: usize) -> impl Iterator<Item = Vec<&str>> {
    text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()).map(move |l| {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() == k {
            f
        } else {
            vec![""; k]
        }
    })
}

pub(crate) fn one() -> Q {
    Q::one()
}
