//! Choosing a sample whose sectors split the planes evenly.
//!
//! `log n` candidate samples of `n^eps` planes are drawn and intersected by
//! brute force. A small poll set of planes, split at random among the
//! candidates, estimates for each candidate how many plane copies its
//! sectors would receive in total and in the fullest sector.

use pem_machine::{chunk_ranges, Cores, DiagnosticKind, Machine, MemRegion, Word};
use pem_primitives::util::{block_chunks, with_scratch};
use pem_primitives::{sample_k_of_n_seq, split_cores, PemRng};

use crate::brute::halfplane_brute;
use crate::geom::{HalfPlane, HullChain, Point2, Sector};
use crate::recursion::HullConfig;
use crate::sectors::find_sectors;
use crate::util::{fill, get, log2, sort_region};
use crate::{HullError, HullResult};

/// Which rule picked the sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PollRule {
    /// Only one candidate was drawn.
    Single,
    /// Smallest estimated total among candidates within the sector bound.
    Accepted,
    /// As `Accepted`, on the second poll.
    Repolled,
    /// No candidate met the bound twice; smallest estimated total taken.
    BestEffort,
}

impl PollRule {
    pub fn accepted(self) -> bool {
        !matches!(self, PollRule::BestEffort)
    }
}

#[derive(Clone, Debug)]
pub struct PollOutcome {
    /// Intersection of the chosen sample.
    pub chain: HullChain,
    /// Handles of the chosen sample.
    pub sample: Vec<Word>,
    pub sectors: Vec<Sector>,
    pub rule: PollRule,
    /// Per candidate of the deciding poll: estimated total copies and largest
    /// sector, or `None` for an unbounded sample.
    pub estimates: Vec<Option<(f64, f64)>>,
    pub chosen: usize,
}

struct Candidate {
    sample: Vec<Word>,
    chain: Option<HullChain>,
}

/// Picks a sample of the planes named by `handles`. Returns `None` when no
/// drawn sample bounds a polygon even after doubling the sample size.
pub fn polling_sample(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    cfg: &HullConfig,
    rng: &mut PemRng,
) -> HullResult<Option<PollOutcome>> {
    let n = handles.len;
    let mc = m.config().clone();
    let need = (mc.b as f64).powf(2.0 / (1.0 - 4.0 * cfg.eps)) * group.len as f64;
    if n < mc.m * group.len || (n as f64) < need {
        m.diagnose(DiagnosticKind::Precondition, format!("polling {n} planes is below max(M p, B^(2/(1-4 eps)) p)"));
    }
    let k = (log2(n).floor() as usize).max(1);
    let mut s = cfg.sample_size(n);
    let bound = cfg.bound(n);
    for attempt in 0..2 {
        let cands = draw(m, group, planes, handles, interior, k, s, rng)?;
        let bounded: Vec<usize> = (0..k).filter(|&c| cands[c].chain.is_some()).collect();
        if bounded.is_empty() {
            s = (2 * s).min(n);
            continue;
        }
        let est = poll(m, group, planes, handles, interior, cfg, &cands, &bounded, rng)?;
        let best_of = |ok: &dyn Fn(&(f64, f64)) -> bool| {
            bounded
                .iter()
                .copied()
                .filter(|&c| est[c].as_ref().is_some_and(ok))
                .min_by(|&a, &b| est[a].unwrap().0.total_cmp(&est[b].unwrap().0))
        };
        let within = best_of(&|e| e.1 <= bound);
        let pick = match (within, attempt) {
            (Some(c), _) if k == 1 => Some((c, PollRule::Single)),
            (Some(c), 0) => Some((c, PollRule::Accepted)),
            (Some(c), _) => Some((c, PollRule::Repolled)),
            (None, 0) => None,
            (None, _) => {
                m.diagnose(
                    DiagnosticKind::Fallback,
                    format!("no sample of {n} planes met the sector bound {bound:.0}"),
                );
                best_of(&|_| true).map(|c| (c, PollRule::BestEffort))
            }
        };
        if let Some((c, rule)) = pick {
            let chain = cands[c].chain.clone().expect("bounded");
            let sectors = Sector::fan(interior, &chain);
            return Ok(Some(PollOutcome {
                chain,
                sample: cands[c].sample.clone(),
                sectors,
                rule,
                estimates: est,
                chosen: c,
            }));
        }
    }
    m.diagnose(DiagnosticKind::Fallback, format!("no bounded sample among {n} planes"));
    Ok(None)
}

/// `k` samples of `s` planes, one from each of `s` equal stretches of the
/// input, each intersected by brute force on its own cores.
#[allow(clippy::too_many_arguments)]
fn draw(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    k: usize,
    s: usize,
    rng: &mut PemRng,
) -> HullResult<Vec<Candidate>> {
    let n = handles.len;
    let cores = split_cores(group, &vec![1; k]);
    let mut stream = rng.stream();
    let mut out = Vec::with_capacity(k);
    for (c, &gc) in cores.iter().enumerate() {
        let core = gc.core(0);
        let chain = with_scratch(m, |m| -> HullResult<(Vec<Word>, Option<HullChain>)> {
            let r = m.alloc(s);
            for (i, span) in chunk_ranges(n, s).into_iter().enumerate() {
                let at = span.start + stream.below((c * s + i) as u64, span.len().max(1) as u64) as usize;
                let h = m.rd(core, handles, at.min(n - 1))?;
                m.wr(core, r, i, h)?;
            }
            let sample = get(m, core, r)?;
            match halfplane_brute(m, gc, planes, r, interior, rng) {
                Ok(ch) => Ok((sample, Some(ch))),
                Err(HullError::Unbounded) => Ok((sample, None)),
                Err(e) => Err(e),
            }
        })?;
        out.push(Candidate { sample: chain.0, chain: chain.1 });
    }
    m.barrier(group);
    Ok(out)
}

/// Estimated (total, largest sector) copies per candidate, scaled from the
/// candidate's share of the poll set to `n`.
#[allow(clippy::too_many_arguments)]
fn poll(
    m: &mut Machine,
    group: Cores,
    planes: &[HalfPlane],
    handles: MemRegion,
    interior: &Point2,
    cfg: &HullConfig,
    cands: &[Candidate],
    bounded: &[usize],
    rng: &mut PemRng,
) -> HullResult<Vec<Option<(f64, f64)>>> {
    let n = handles.len;
    let b = m.config().b;
    let q = cfg.poll_size(n, bounded.len());
    let stride = planes.len() as Word;
    let mut est = vec![None; cands.len()];
    with_scratch(m, |m| -> HullResult<()> {
        // Per-core draws from each core's chunk, tagged with a random candidate.
        let g = group.fit(n, b);
        let chunks = block_chunks(handles, g.len, b);
        let shares = chunk_ranges(q, g.len);
        let tags = m.alloc(q);
        let mut stream = rng.stream();
        for (ci, r) in chunks.iter().enumerate() {
            let c = g.core(ci);
            let want = shares[ci].len();
            if want == 0 || r.is_empty() {
                continue;
            }
            let drawn = sample_k_of_n_seq(m, c, handles.slice(r.start, r.len()), want, rng)?;
            for i in 0..want {
                let h = m.rd(c, drawn, i)?;
                let pick = bounded[stream.below((shares[ci].start + i) as u64, bounded.len() as u64) as usize];
                m.wr(c, tags, shares[ci].start + i, pick as Word * stride + h)?;
            }
        }
        m.barrier(group);
        let sorted = sort_region(m, group, tags, &pem_primitives::Natural, rng)?;
        let all = get(m, group.core(0), sorted)?;
        let cores = split_cores(group, &vec![1; bounded.len()]);
        for (&c, &gc) in bounded.iter().zip(&cores) {
            let lo = all.partition_point(|&t| t < c as Word * stride);
            let hi = all.partition_point(|&t| t < (c as Word + 1) * stride);
            if lo == hi {
                est[c] = Some((f64::INFINITY, f64::INFINITY));
                continue;
            }
            let chain = cands[c].chain.as_ref().expect("bounded");
            let mine = m.alloc(hi - lo);
            fill(m, gc, mine, |m, core, i| Ok(m.rd(core, sorted, lo + i)? % stride))?;
            let iv = find_sectors(m, gc, planes, mine, interior, chain, cfg.locate_x(), rng)?;
            let words = get(m, gc.core(0), iv)?;
            let sectors = chain.len();
            let mut per = vec![0usize; sectors];
            let mut total = 0usize;
            for pair in words.chunks(2) {
                let (start, len) = (pair[0] as usize, pair[1] as usize);
                total += len;
                for j in 0..len {
                    per[(start + j) % sectors] += 1;
                }
            }
            let scale = n as f64 / (hi - lo) as f64;
            let largest = per.iter().copied().max().unwrap_or(0);
            est[c] = Some((total as f64 * scale, largest as f64 * scale));
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(est)
}
