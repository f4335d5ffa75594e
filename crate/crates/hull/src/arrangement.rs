//! Point location among a few lines: vertical slabs at the crossing points,
//! lines ordered bottom to top inside each slab.
//!
//! Lines are constraints `a u + b v <= c` with `c != 0`; a point's region
//! records which of them it violates. Degenerate positions are resolved by
//! moving the query point to `(1 - d) w` for an infinitesimal `d > 0`, so a
//! point on a line satisfies it exactly when the origin does, and a point on
//! a slab boundary moves into the open slab on the origin's side (staying on
//! the boundary only when `u = 0`). A rational rotation first makes every
//! line non-vertical.

use std::cmp::Ordering;

use num::{BigInt, Signed, Zero};
use pem_machine::{chunk_ranges, Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_partition::{partition_main_unchecked, PartitionTask};
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{allocate_cores, brute_sort, KeyOrder, PemRng};

use crate::geom::{HalfPlane, Point2, Q};
use crate::sectors::SectorInterval;
use crate::util::{fill, put};
use crate::{HullError, HullResult};

#[derive(Clone, Debug)]
pub struct SlabArrangement {
    pub lines: Vec<HalfPlane>,
    /// `(cos, sin)` of the rotation applied before slabbing.
    pub rotation: (Q, Q),
    /// Lines as `v = alpha + beta u` after rotation.
    slope_form: Vec<(Q, Q)>,
    /// Whether the rotated `b` of each line is positive.
    upward: Vec<bool>,
    /// Distinct crossing abscissae, ascending. Slab `2i` is the open strip
    /// left of `slab_xs[i]` (right of the previous one), slab `2i + 1` the
    /// vertical line `u = slab_xs[i]`.
    pub slab_xs: Vec<Q>,
    /// Per slab, line indices from bottom to top.
    pub order: Vec<Vec<usize>>,
    /// Per slab, each line's position in `order`.
    pos: Vec<Vec<usize>>,
    /// Per region `slab * (m + 1) + strip`, the lines a point there violates.
    pub violated: Vec<Vec<bool>>,
    /// Per region, the sectors cut (line `k` standing for vertex `k`).
    pub intervals: Vec<SectorInterval>,
    /// Slab boundaries as splitter words.
    pub bounds_table: MemRegion,
    /// Per slab, `m` line words bottom to top.
    pub order_table: MemRegion,
    /// Per region, `start, len`.
    pub interval_table: MemRegion,
}

fn line_word(k: usize) -> Word {
    -1 - k as Word
}

fn word_line(w: Word) -> usize {
    (-1 - w) as usize
}

/// Rationals with `cos^2 + sin^2 = 1`: the identity, then `t = 2, 3, ...`
/// via `((t^2 - 1) / (t^2 + 1), 2t / (t^2 + 1))`.
fn rotation(t: i64) -> (Q, Q) {
    if t < 2 {
        return (crate::geom::q(1), Q::zero());
    }
    let d = BigInt::from(t * t + 1);
    (Q::new(BigInt::from(t * t - 1), d.clone()), Q::new(BigInt::from(2 * t), d))
}

pub(crate) fn rotate(p: &Point2, (c, s): &(Q, Q)) -> Point2 {
    Point2::new(c * &p.x - s * &p.y, s * &p.x + c * &p.y)
}

impl SlabArrangement {
    pub fn m(&self) -> usize {
        self.lines.len()
    }

    pub fn slabs(&self) -> usize {
        2 * self.slab_xs.len() + 1
    }

    pub fn regions(&self) -> usize {
        self.slabs() * (self.m() + 1)
    }

    pub fn is_rotated(&self) -> bool {
        !self.rotation.1.is_zero()
    }

    /// A point in the rotated frame.
    pub fn to_frame(&self, p: &Point2) -> Point2 {
        rotate(p, &self.rotation)
    }

    fn value(&self, k: usize, u: &Q) -> Q {
        let (a, b) = &self.slope_form[k];
        a + b * u
    }

    /// Whether line `k` passes below the (perturbed) framed point `w`. On the
    /// line, shrinking `w` moves it to the side of the intercept's sign.
    pub(crate) fn below(&self, k: usize, w: &Point2) -> bool {
        let d = &w.y - self.value(k, &w.x);
        d.is_positive() || (d.is_zero() && self.slope_form[k].0.is_negative())
    }

    /// Slab of a framed point, by counting boundaries.
    pub fn slab_of(&self, w: &Point2) -> usize {
        let left = self.slab_xs.partition_point(|x| x < &w.x);
        if left < self.slab_xs.len() && self.slab_xs[left] == w.x {
            match w.x.cmp(&Q::zero()) {
                Ordering::Greater => 2 * left,
                Ordering::Less => 2 * left + 2,
                Ordering::Equal => 2 * left + 1,
            }
        } else {
            2 * left
        }
    }

    /// Strip of a framed point inside `slab`: lines below it, by binary search.
    pub fn strip_of(&self, slab: usize, w: &Point2) -> usize {
        self.order[slab].partition_point(|&k| self.below(k, w))
    }

    /// Region of an (unframed) point by two binary searches.
    pub fn region_of(&self, p: &Point2) -> usize {
        let w = self.to_frame(p);
        let s = self.slab_of(&w);
        s * (self.m() + 1) + self.strip_of(s, &w)
    }

    /// A representative abscissa of `slab`.
    fn slab_u(&self, slab: usize) -> Q {
        let xs = &self.slab_xs;
        let i = slab / 2;
        if slab % 2 == 1 {
            return xs[i].clone();
        }
        let one = crate::geom::q(1);
        match (i.checked_sub(1).map(|j| &xs[j]), xs.get(i)) {
            (None, None) => Q::zero(),
            (None, Some(r)) => r - one,
            (Some(l), None) => l + one,
            (Some(l), Some(r)) => (l + r) / crate::geom::q(2),
        }
    }
}

/// Builds the slab structure for `lines` (line `k` standing for vertex `k`
/// of a polygon whose sectors are numbered by their first vertex).
///
/// Crossings are computed pairwise across the cores and sorted with the
/// brute-force sort; each slab's line order and each region's violated set
/// and sector interval are then tabulated, one slab per core at a time.
pub fn preprocess_arrangement(m: &mut Machine, group: Cores, lines: &[HalfPlane]) -> HullResult<SlabArrangement> {
    let mm = lines.len();
    let b = m.config().b;
    if mm > 0 && (mm as u128).pow(4) < (b * group.len) as u128 {
        m.diagnose(DiagnosticKind::Precondition, format!("arrangement of {mm} lines is below m^4 >= B p"));
    }
    if let Some(k) = lines.iter().position(|h| h.c.is_zero()) {
        return Err(HullError::Degenerate(format!("line {k} passes through the origin")));
    }
    let mut t = 0;
    let rotation = loop {
        let r = rotation(t);
        if lines.iter().all(|h| !(&r.1 * &h.a + &r.0 * &h.b).is_zero()) {
            break r;
        }
        t = if t == 0 { 2 } else { t + 1 };
    };
    let framed: Vec<HalfPlane> = lines
        .iter()
        .map(|h| {
            let n = rotate(&Point2::new(h.a.clone(), h.b.clone()), &rotation);
            HalfPlane { a: n.x, b: n.y, c: h.c.clone() }
        })
        .collect();
    let slope_form: Vec<(Q, Q)> = framed.iter().map(|h| (&h.c / &h.b, -(&h.a / &h.b))).collect();
    let upward: Vec<bool> = framed.iter().map(|h| h.b.is_positive()).collect();

    // Crossing abscissae.
    let pairs: Vec<(usize, usize)> = (0..mm).flat_map(|i| (i + 1..mm).map(move |j| (i, j))).collect();
    let mut xs_all: Vec<Q> = Vec::new();
    let slab_xs = with_scratch(m, |m| -> HullResult<Vec<Q>> {
        let slots = m.alloc(pairs.len());
        let g = group.fit(pairs.len(), b);
        let mut runs = Vec::new();
        for (ci, r) in block_chunks(slots, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            let mut k = 0;
            for s in r.clone() {
                let (i, j) = pairs[s];
                m.work(c, 1);
                let ((ai, bi), (aj, bj)) = (&slope_form[i], &slope_form[j]);
                if bi != bj {
                    m.wr(c, slots, r.start + k, xs_all.len() as Word)?;
                    xs_all.push((aj - ai) / (bi - bj));
                    k += 1;
                }
            }
            runs.push(slots.slice(r.start, k));
        }
        m.barrier(group);
        let cand = pem_merge::concat_runs(m, group, &runs)?;
        let by_x = |a: Word, b: Word| (&xs_all[a as usize], a) < (&xs_all[b as usize], b);
        let sorted = brute_sort(m, group, cand, &by_x)?;
        let c0 = group.core(0);
        let mut xs: Vec<Q> = Vec::new();
        for i in 0..sorted.len {
            let h = m.rd(c0, sorted, i)? as usize;
            m.work(c0, 1);
            if xs.last() != Some(&xs_all[h]) {
                xs.push(xs_all[h].clone());
            }
        }
        m.barrier(group);
        Ok(xs)
    })?;

    let mut arr = SlabArrangement {
        lines: lines.to_vec(),
        rotation,
        slope_form,
        upward,
        slab_xs,
        order: Vec::new(),
        pos: Vec::new(),
        violated: Vec::new(),
        intervals: Vec::new(),
        bounds_table: MemRegion::new(0, 0),
        order_table: MemRegion::new(0, 0),
        interval_table: MemRegion::new(0, 0),
    };
    let slabs = arr.slabs();
    let bounds: Vec<Word> = (0..2 * arr.slab_xs.len()).map(line_word).collect();
    arr.bounds_table = put(m, group.core(0), &bounds)?;
    arr.order_table = m.alloc(slabs * mm);
    arr.interval_table = m.alloc(slabs * (mm + 1) * 2);

    // Slab orders: by value at the slab's abscissa, then slope (the order
    // just right of a crossing), then index.
    let g = group.fit(slabs, 1);
    let spread = chunk_ranges(slabs, g.len);
    let mut order = vec![Vec::new(); slabs];
    for (ci, r) in spread.iter().enumerate() {
        let c = g.core(ci);
        for s in r.clone() {
            let u = arr.slab_u(s);
            let vals: Vec<Q> = (0..mm).map(|k| arr.value(k, &u)).collect();
            let mut ord: Vec<usize> = (0..mm).collect();
            ord.sort_by(|&i, &j| {
                vals[i].cmp(&vals[j]).then_with(|| arr.slope_form[i].1.cmp(&arr.slope_form[j].1)).then(i.cmp(&j))
            });
            m.work(c, (mm * (1 + mm.max(2).ilog2() as usize)) as u64);
            for (k, &l) in ord.iter().enumerate() {
                m.wr(c, arr.order_table, s * mm + k, line_word(l))?;
            }
            order[s] = ord;
        }
    }
    m.barrier(group);
    arr.pos = order
        .iter()
        .map(|ord| {
            let mut p = vec![0; mm];
            for (k, &l) in ord.iter().enumerate() {
                p[l] = k;
            }
            p
        })
        .collect();
    arr.order = order;

    // Regions: a point in strip j of a slab lies above exactly the first j
    // lines of the slab order, which settles every line's side.
    let regions = arr.regions();
    arr.violated = vec![Vec::new(); regions];
    arr.intervals = vec![SectorInterval::EMPTY; regions];
    for (ci, r) in spread.iter().enumerate() {
        let c = g.core(ci);
        for s in r.clone() {
            for j in 0..=mm {
                let viol: Vec<bool> = (0..mm).map(|k| (arr.pos[s][k] < j) == arr.upward[k]).collect();
                m.work(c, mm as u64);
                let iv = SectorInterval::covering_vertices(&viol);
                let reg = s * (mm + 1) + j;
                m.wr(c, arr.interval_table, 2 * reg, iv.start as Word)?;
                m.wr(c, arr.interval_table, 2 * reg + 1, iv.len as Word)?;
                arr.violated[reg] = viol;
                arr.intervals[reg] = iv;
            }
        }
    }
    m.barrier(group);
    Ok(arr)
}

/// Slab boundaries as splitters: boundary `i` is the pair `x_i - d`,
/// `x_i + d`. A point with `u = x_i` sits left of the pair when `u > 0`,
/// right of it when `u < 0` and between the two when `u = 0`.
struct SlabKeys<'a> {
    arr: &'a SlabArrangement,
    pts: &'a [Point2],
}

impl SlabKeys<'_> {
    fn key(&self, w: Word) -> (&Q, i8) {
        if w >= 0 {
            let x = &self.pts[w as usize].x;
            (
                x,
                match x.cmp(&Q::zero()) {
                    Ordering::Greater => -2,
                    Ordering::Less => 2,
                    Ordering::Equal => 0,
                },
            )
        } else {
            let i = word_line(w);
            (&self.arr.slab_xs[i / 2], if i.is_multiple_of(2) { -1 } else { 1 })
        }
    }
}

impl KeyOrder for SlabKeys<'_> {
    fn less(&self, a: Word, b: Word) -> bool {
        match self.key(a).cmp(&self.key(b)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a < b,
        }
    }
}

/// Lines of one slab against points of that slab.
struct StripKeys<'a> {
    arr: &'a SlabArrangement,
    slab: usize,
    pts: &'a [Point2],
}

impl KeyOrder for StripKeys<'_> {
    fn less(&self, a: Word, b: Word) -> bool {
        let s = self.slab;
        match (a < 0, b < 0) {
            (true, true) => self.arr.pos[s][word_line(a)] < self.arr.pos[s][word_line(b)],
            (true, false) => self.arr.below(word_line(a), &self.pts[b as usize]),
            (false, true) => !self.arr.below(word_line(b), &self.pts[a as usize]),
            (false, false) => {
                let sa = self.arr.strip_of(s, &self.pts[a as usize]);
                let sb = self.arr.strip_of(s, &self.pts[b as usize]);
                (sa, a) < (sb, b)
            }
        }
    }
}

/// Region of every point named by `handles`, in input order. Points are
/// first partitioned into slabs, then each slab's points are partitioned by
/// that slab's lines on a core group sized by the slab's load: slabs with at
/// least `m^x` points count with their size, smaller non-empty ones as `m^x`.
pub fn locate_points(
    m: &mut Machine,
    group: Cores,
    pts: &[Point2],
    handles: MemRegion,
    arr: &SlabArrangement,
    x: u32,
    rng: &mut PemRng,
) -> HullResult<MemRegion> {
    let n = handles.len;
    let mm = arr.m();
    let cfg = m.config().clone();
    let threshold = (mm.max(1) as f64).powi(x as i32);
    if (n as f64) < threshold * (mm * mm) as f64 || n < cfg.m * group.len {
        m.diagnose(
            DiagnosticKind::Precondition,
            format!("locating {n} points among {mm} lines is below the size bounds (x = {x})"),
        );
    }
    let result = m.alloc(n);
    if n == 0 {
        return Ok(result);
    }
    let mut framed = Vec::with_capacity(n);
    with_scratch(m, |m| -> HullResult<()> {
        let local = m.alloc(n);
        fill(m, group, local, |m, c, i| {
            let h = m.rd(c, handles, i)?;
            m.work(c, 1);
            framed.push((i, arr.to_frame(&pts[h as usize])));
            Ok(i as Word)
        })?;
        framed.sort_by_key(|(i, _)| *i);
        let w: Vec<Point2> = framed.drain(..).map(|(_, p)| p).collect();
        let slabs = partition_main_unchecked(
            m,
            group,
            PartitionTask::new(local, arr.bounds_table, group.len),
            &SlabKeys { arr, pts: &w },
            rng,
        )?;
        let weights: Vec<usize> = (0..arr.slabs())
            .map(|s| {
                let size = slabs.bucket_len(s);
                if size == 0 {
                    0
                } else {
                    size.max(threshold.min(n as f64) as usize)
                }
            })
            .collect();
        let cores = allocate_cores(m, group, &weights)?;
        let b = cfg.b;
        for (s, &gs) in cores.iter().enumerate() {
            let keys = slabs.bucket(s);
            if keys.is_empty() {
                continue;
            }
            let lines = arr.order_table.slice(s * mm, mm);
            let run = partition_main_unchecked(
                m,
                gs,
                PartitionTask::new(keys, lines, gs.len),
                &StripKeys { arr, slab: s, pts: &w },
                rng,
            )?;
            let g = gs.fit(keys.len, b);
            for (ci, range) in block_chunks(run.data, g.len, b).into_iter().enumerate() {
                let c = g.core(ci);
                let mut j = run.bounds.partition_point(|&v| v <= range.start).saturating_sub(1);
                for at in range {
                    while at >= run.bounds[j + 1] {
                        j += 1;
                    }
                    let h = m.rd(c, run.data, at)?;
                    m.wr(c, result, h as usize, (s * (mm + 1) + j) as Word)?;
                }
            }
            m.barrier(gs);
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(result)
}
