//! The randomized intersection recursion and the convex hull built on it.

use std::cmp::Ordering;

use pem_machine::{Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_merge::concat_runs;
use pem_primitives::{allocate_cores, par_reduce, PemError, PemRng};

use crate::dual::{dualize_vertices, undualize_chain};
use crate::filter::filter_all;
use crate::geom::{orient, q, HalfPlane, HullChain, Point2};
use crate::polling::{polling_sample, PollRule};
use crate::sectors::{expand_by_sector, find_sectors};
use crate::seqhull::intersect_seq;
use crate::split::split_upper_lower;
use crate::util::{fill, get, iota, log2, put};
use crate::{HullError, HullResult};

/// Below this many planes a sub-problem is always solved sequentially.
const LEAF_MIN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct HullConfig {
    /// Sample size exponent: samples hold `n^eps` planes.
    pub eps: f64,
    /// Expected bound `a n` on the copies made by sector expansion.
    pub a: f64,
    /// Smallest sample drawn.
    pub sample_floor: usize,
    /// Smallest poll share per candidate.
    pub poll_floor: usize,
    pub seed: u64,
}

impl Default for HullConfig {
    fn default() -> Self {
        HullConfig { eps: 1.0 / 32.0, a: 4.0, sample_floor: 8, poll_floor: 32, seed: 0 }
    }
}

impl HullConfig {
    pub fn with_seed(seed: u64) -> Self {
        HullConfig { seed, ..Self::default() }
    }

    /// Largest sector group an accepted sample may produce:
    /// `2 n^(1 - eps) log n`.
    pub fn bound(&self, n: usize) -> f64 {
        2.0 * (n as f64).powf(1.0 - self.eps) * log2(n)
    }

    pub fn sample_size(&self, n: usize) -> usize {
        ((n as f64).powf(self.eps).floor() as usize).max(self.sample_floor).min(n)
    }

    /// Poll set size: `n / log^4 n`, at least `poll_floor` per candidate.
    pub fn poll_size(&self, n: usize, candidates: usize) -> usize {
        let base = (n as f64 / log2(n).powi(4)).floor() as usize;
        base.max(self.poll_floor * candidates).min(n)
    }

    /// Exponent of the large/small split in point location:
    /// `1 / (2 eps) - 2`, at least 2.
    pub fn locate_x(&self) -> u32 {
        ((0.5 / self.eps - 2.0).round() as u32).max(2)
    }
}

/// One sampling level of the recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct HullRound {
    pub n: usize,
    pub depth: usize,
    pub rule: PollRule,
    pub sample_vertices: usize,
    /// Plane copies over all sectors.
    pub expansion: usize,
    pub max_group: usize,
    /// `2 n^(1 - eps) log n`.
    pub bound: f64,
    pub survivors: usize,
}

impl HullRound {
    pub fn within_bound(&self) -> bool {
        self.max_group as f64 <= self.bound
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct HullStats {
    pub rounds: Vec<HullRound>,
    pub sequential_leaves: usize,
    /// Sub-problems solved sequentially because sampling did not help.
    pub fallbacks: usize,
}

#[derive(Clone, Debug)]
pub struct HullOutcome {
    pub chain: HullChain,
    pub stats: HullStats,
}

/// Intersection of `planes`, which must bound a polygon with `interior`
/// strictly inside. Requires `n >= M p`.
pub fn hull_main(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    interior: &Point2,
    cfg: &HullConfig,
) -> HullResult<HullOutcome> {
    let n = planes.len();
    let need = m.config().m * group.len;
    if n < need {
        return Err(PemError::Precondition(format!("n = {n} is below M p = {need} (p = {})", group.len)).into());
    }
    solve_root(m, group, planes, interior, cfg)
}

fn solve_root(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    interior: &Point2,
    cfg: &HullConfig,
) -> HullResult<HullOutcome> {
    let n = planes.len();
    if n < 3 {
        return Err(HullError::Unbounded);
    }
    let mut rng = PemRng::new(cfg.seed);
    let mut stats = HullStats::default();
    let mark = m.mark();
    let res = (|| {
        let handles = m.alloc(n);
        fill(m, group, handles, |m, c, i| {
            m.work(c, 1);
            if planes[i].contains_strictly(interior) {
                Ok(i as Word)
            } else {
                Err(HullError::Infeasible(i))
            }
        })?;
        let mut ctx = Ctx { planes, o: interior, cfg, rng: &mut rng, stats: &mut stats, grain: n / group.len };
        ctx.solve(m, group, handles, 0)
    })();
    m.release(mark);
    Ok(HullOutcome { chain: res?, stats })
}

struct Ctx<'a> {
    planes: &'a [HalfPlane],
    o: &'a Point2,
    cfg: &'a HullConfig,
    rng: &'a mut PemRng,
    stats: &'a mut HullStats,
    grain: usize,
}

impl Ctx<'_> {
    fn leaf(&mut self, m: &mut Machine, group: Cores, handles: MemRegion) -> HullResult<HullChain> {
        self.stats.sequential_leaves += 1;
        let (chain, _) = intersect_seq(m, group.core(0), self.planes, handles, self.o, self.rng)?;
        Ok(chain)
    }

    fn solve(&mut self, m: &mut Machine, group: Cores, handles: MemRegion, depth: usize) -> HullResult<HullChain> {
        let n = handles.len;
        if n <= self.grain.max(LEAF_MIN) || group.len == 1 {
            return self.leaf(m, group, handles);
        }
        let mark = m.mark();
        let res = self.split(m, group, handles, depth);
        m.release(mark);
        res
    }

    fn split(&mut self, m: &mut Machine, group: Cores, handles: MemRegion, depth: usize) -> HullResult<HullChain> {
        let n = handles.len;
        let Some(poll) = polling_sample(m, group, self.planes, handles, self.o, self.cfg, self.rng)? else {
            self.stats.fallbacks += 1;
            return self.leaf(m, group, handles);
        };
        let ms = poll.chain.len();
        let iv = find_sectors(m, group, self.planes, handles, self.o, &poll.chain, self.cfg.locate_x(), self.rng)?;
        let groups = expand_by_sector(m, group, handles, iv, ms, self.planes.len(), self.cfg.a, self.rng)?;
        let filtered = filter_all(m, group, self.planes, &groups, &poll.sectors, self.rng)?;
        let bound = self.cfg.bound(n);
        let round = HullRound {
            n,
            depth,
            rule: poll.rule,
            sample_vertices: ms,
            expansion: groups.data.len,
            max_group: (0..ms).map(|j| groups.bucket_len(j)).max().unwrap_or(0),
            bound,
            survivors: filtered.iter().map(|r| r.len).sum(),
        };
        if poll.rule.accepted() && !round.within_bound() {
            m.diagnose(
                DiagnosticKind::Note,
                format!("sector group of {} exceeds the bound {bound:.0}", round.max_group),
            );
        }
        self.stats.rounds.push(round);

        // Every sub-problem keeps the sample, which bounds it.
        let sample = put(m, group.core(0), &poll.sample)?;
        m.barrier(group);
        let mut subs = Vec::with_capacity(ms);
        for f in &filtered {
            subs.push(concat_runs(m, group, &[*f, sample])?);
        }
        let sizes: Vec<usize> = subs.iter().map(|r| r.len).collect();
        let cores = allocate_cores(m, group, &sizes)?;
        let mut vertices = Vec::new();
        for (k, sub) in subs.iter().enumerate() {
            let chain = if sub.len >= n {
                self.stats.fallbacks += 1;
                self.leaf(m, cores[k], *sub)?
            } else {
                self.solve(m, cores[k], *sub, depth + 1)?
            };
            let sector = &poll.sectors[k];
            vertices.extend(chain.vertices.into_iter().filter(|v| sector.contains(v)));
        }
        m.barrier(group);
        Ok(HullChain::around(self.o, vertices))
    }
}

/// Convex hull of `pts`, counterclockwise from the lexicographically
/// smallest vertex. Collinear inputs give the two extreme points.
///
/// The points are split by the line through the extremes; an interior point
/// `O` is taken from the extremes and one point off that line; both sides
/// are dualized about `O` into constraints whose intersection is solved by
/// the recursion on as many cores as `n >= M p` allows, and each edge of
/// that intersection gives back one hull vertex.
pub fn convex_hull_2d(m: &mut Machine, group: Cores, pts: &[Point2], cfg: &HullConfig) -> HullResult<HullOutcome> {
    let n = pts.len();
    if n == 0 {
        return Err(HullError::Degenerate("no points".into()));
    }
    let mark = m.mark();
    let res = (|| {
        let handles = iota(m, group, n)?;
        let (up, down) = split_upper_lower(m, group, pts, handles)?;
        let (p1, p2) = crate::split::extremes(m, group, pts, handles)?;
        let (a, b) = (&pts[p1 as usize], &pts[p2 as usize]);
        let off = |h: Word| orient(a, b, &pts[h as usize]) != Ordering::Equal;
        let third = par_reduce(m, group, handles, |x, y| if off(x) { x } else { y })?;
        if !off(third) {
            let lo = pts.iter().min().expect("nonempty").clone();
            let hi = pts.iter().max().expect("nonempty").clone();
            let v = if lo == hi { vec![lo] } else { vec![lo, hi] };
            return Ok(HullOutcome { chain: HullChain { vertices: v }, stats: HullStats::default() });
        }
        let c = &pts[third as usize];
        let three = q(3);
        let o = Point2::new((&a.x + &b.x + &c.x) / &three, (&a.y + &b.y + &c.y) / &three);
        let mut planes = Vec::with_capacity(n);
        for side in [up, down] {
            let hs = get(m, group.core(0), side)?;
            let keep: Vec<Point2> = hs.iter().map(|&h| pts[h as usize].clone()).filter(|p| *p != o).collect();
            planes.extend(dualize_vertices(&keep, &o)?);
        }
        let p = (planes.len() / m.config().m).clamp(1, group.len);
        let out = solve_root(m, group.take(p), &planes, &o, cfg)?;
        let chain = undualize_chain(&out.chain, &o)?;
        Ok(HullOutcome { chain, stats: out.stats })
    })();
    m.release(mark);
    res
}
