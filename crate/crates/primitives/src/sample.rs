//! Random sampling: splitter selection and sequential k-of-n sampling.

use pem_machine::{chunk_ranges, Cores, Machine, MemRegion};

use crate::brute::brute_sort;
use crate::order::{KeyOrder, Natural};
use crate::rng::PemRng;
use crate::seqsort::merge_sort_seq;
use crate::util::{block_chunks, isqrt, with_scratch};
use crate::{PemError, Result};

/// Sorted splitters drawn from a key sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitterSet {
    pub region: MemRegion,
    /// Sampling exponent: `region.len = ceil(n^(1/x))` (capped by the
    /// intermediate sample size).
    pub x: u32,
    /// Oversampling ratio `sqrt(n) / n^(1/x)`.
    pub t: f64,
    /// Size of the intermediate sample the splitters were picked from.
    pub sample_size: usize,
}

impl SplitterSet {
    pub fn len(&self) -> usize {
        self.region.len
    }

    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }
}

/// Smallest `s >= 1` with `s^x >= n`.
pub fn splitter_count(n: usize, x: u32) -> usize {
    if n <= 1 {
        return 1;
    }
    let mut s = ((n as f64).powf(1.0 / x as f64).floor() as usize).max(1);
    while (s as f64).powi(x as i32) < n as f64 {
        s += 1;
    }
    while s > 1 && ((s - 1) as f64).powi(x as i32) >= n as f64 {
        s -= 1;
    }
    s
}

/// `sqrt(n) / n^(1/x)`.
pub fn oversampling(n: usize, x: u32) -> f64 {
    let n = n as f64;
    n.sqrt() / n.powf(1.0 / x as f64)
}

/// Picks one uniformly random element from each of `floor(sqrt(n))` equal
/// chunks of `a`, sorts that sample by brute force, and keeps every
/// `sample / s`-th element, where `s = ceil(n^(1/x))`.
pub fn sample_splitters<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    x: u32,
    order: &O,
    rng: &mut PemRng,
) -> Result<SplitterSet> {
    if x < 4 {
        return Err(PemError::Precondition(format!("sampling exponent x = {x} must be at least 4")));
    }
    let n = a.len;
    if n == 0 {
        return Err(PemError::Empty);
    }
    let s_star = isqrt(n).max(1);
    let s = splitter_count(n, x).min(s_star);
    let out = m.alloc(s);
    let b = m.config().b;
    let mut stream = rng.stream();
    with_scratch(m, |m| -> Result<()> {
        let sample = m.alloc(s_star);
        let chunks = chunk_ranges(n, s_star);
        let g = group.fit(s_star, b);
        for (ci, r) in block_chunks(sample, g.len, b).into_iter().enumerate() {
            let c = g.core(ci);
            for j in r {
                let ch = &chunks[j];
                let pick = ch.start + stream.below(j as u64, ch.len() as u64) as usize;
                m.work(c, 1);
                let v = m.rd(c, a, pick)?;
                m.wr(c, sample, j, v)?;
            }
        }
        m.barrier(group);
        let sorted = brute_sort(m, group, sample, order)?;
        let c = group.core(0);
        for k in 1..=s {
            let pos = (k * s_star).div_ceil(s) - 1;
            let v = m.rd(c, sorted, pos)?;
            m.wr(c, out, k - 1, v)?;
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(SplitterSet { region: out, x, t: oversampling(n, x), sample_size: s_star })
}

/// Draws `k` elements of `a` uniformly with replacement on one core: `k`
/// random ranks are sorted and then gathered in one pass over `a`.
pub fn sample_k_of_n_seq(m: &mut Machine, core: usize, a: MemRegion, k: usize, rng: &mut PemRng) -> Result<MemRegion> {
    let out = m.alloc(k);
    if k == 0 {
        return Ok(out);
    }
    if a.is_empty() {
        return Err(PemError::Empty);
    }
    let mut stream = rng.stream();
    with_scratch(m, |m| -> Result<()> {
        let ranks = m.alloc(k);
        for i in 0..k {
            let r = stream.below(i as u64, a.len as u64);
            m.work(core, 1);
            m.wr(core, ranks, i, r as i64)?;
        }
        merge_sort_seq(m, core, ranks, &Natural)?;
        gather_sorted(m, core, a, ranks, out)
    })?;
    Ok(out)
}

/// `out[i] = a[ranks[i]]` for nondecreasing `ranks`, as one joint scan.
pub fn gather_sorted(m: &mut Machine, core: usize, a: MemRegion, ranks: MemRegion, out: MemRegion) -> Result<()> {
    let mut pos = 0usize;
    for i in 0..ranks.len {
        let r = m.rd(core, ranks, i)? as usize;
        if r < pos {
            return Err(PemError::Precondition("ranks must be nondecreasing".into()));
        }
        m.work(core, (r - pos) as u64);
        pos = r;
        let v = m.rd(core, a, r)?;
        m.wr(core, out, i, v)?;
    }
    Ok(())
}
