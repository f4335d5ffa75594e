//! Bucket-preserving merge.
//!
//! `x` runs, each cut into the same `t` buckets, become one run whose bucket
//! `j` is bucket `j` of run 0, then of run 1, and so on. Keys are never
//! compared: the `x * t` size matrix is transposed and prefix-summed to give
//! every segment its output offset, and each core then fills one contiguous
//! slice of the output.

use pem_machine::{chunk_ranges, Cores, Machine, MemRegion, Word};
use pem_primitives::util::{block_chunks, par_copy, with_scratch};
use pem_primitives::{prefix_sum, transpose, PemError, Result};

/// A key sequence cut into `bounds.len() - 1` contiguous buckets; bucket `j`
/// is `data[bounds[j]..bounds[j + 1]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BucketedRun {
    pub data: MemRegion,
    pub bounds: Vec<usize>,
}

impl BucketedRun {
    pub fn new(data: MemRegion, bounds: Vec<usize>) -> Result<Self> {
        let run = BucketedRun { data, bounds };
        run.validate()?;
        Ok(run)
    }

    /// The whole region as one bucket.
    pub fn single(data: MemRegion) -> Self {
        BucketedRun { data, bounds: vec![0, data.len] }
    }

    pub fn buckets(&self) -> usize {
        self.bounds.len().saturating_sub(1)
    }

    pub fn bucket(&self, j: usize) -> MemRegion {
        self.data.slice(self.bounds[j], self.bounds[j + 1] - self.bounds[j])
    }

    pub fn bucket_len(&self, j: usize) -> usize {
        self.bounds[j + 1] - self.bounds[j]
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.bounds.len() >= 2
            && self.bounds[0] == 0
            && *self.bounds.last().unwrap() == self.data.len
            && self.bounds.windows(2).all(|w| w[0] <= w[1]);
        if ok {
            Ok(())
        } else {
            Err(PemError::Precondition(format!(
                "bucket bounds {:?} do not describe a run of {} words",
                self.bounds, self.data.len
            )))
        }
    }
}

/// Merges `runs`, all with `t` buckets, into one run with `t` buckets.
///
/// Requires `y >= x * t` for total size `y`; a single run is copied as is.
pub fn merge_bucketed(m: &mut Machine, group: Cores, runs: &[BucketedRun]) -> Result<BucketedRun> {
    let y: usize = runs.iter().map(|r| r.data.len).sum();
    let out = m.alloc(y);
    merge_bucketed_into(m, group, runs, out)
}

/// [`merge_bucketed`] writing into `dest`, which must hold exactly the total
/// number of keys.
pub fn merge_bucketed_into(
    m: &mut Machine,
    group: Cores,
    runs: &[BucketedRun],
    dest: MemRegion,
) -> Result<BucketedRun> {
    let x = runs.len();
    if x == 0 {
        return Err(PemError::Empty);
    }
    let t = runs[0].buckets();
    for r in runs {
        r.validate()?;
        if r.buckets() != t {
            return Err(PemError::Precondition(format!("runs disagree on bucket count ({} vs {t})", r.buckets())));
        }
    }
    let y: usize = runs.iter().map(|r| r.data.len).sum();
    if dest.len != y {
        return Err(PemError::Precondition(format!("destination holds {} words, runs hold {y}", dest.len)));
    }
    if x == 1 {
        par_copy(m, group, runs[0].data, dest)?;
        return Ok(BucketedRun { data: dest, bounds: runs[0].bounds.clone() });
    }
    if y < x * t {
        return Err(PemError::Precondition(format!(
            "merging {x} runs of {t} buckets needs at least {} keys, got {y}",
            x * t
        )));
    }
    merge_unchecked(m, group, runs, t, dest)
}

fn merge_unchecked(
    m: &mut Machine,
    group: Cores,
    runs: &[BucketedRun],
    t: usize,
    out: MemRegion,
) -> Result<BucketedRun> {
    let x = runs.len();
    let y = out.len;
    let b = m.config().b;
    let mut out_bounds = vec![0usize; t + 1];
    for j in 0..t {
        out_bounds[j + 1] = out_bounds[j] + runs.iter().map(|r| r.bucket_len(j)).sum::<usize>();
    }
    if y == 0 {
        return Ok(BucketedRun { data: out, bounds: out_bounds });
    }
    let xt = x * t;
    with_scratch(m, |m| -> Result<()> {
        // Size matrix, run-major, written one row per core.
        let sizes = m.alloc(xt);
        let gs = group.fit(xt, b);
        for (ci, rows) in chunk_ranges(x, gs.len).into_iter().enumerate() {
            let c = gs.core(ci);
            for i in rows {
                for j in 0..t {
                    m.wr(c, sizes, i * t + j, runs[i].bucket_len(j) as Word)?;
                }
            }
        }
        m.barrier(group);
        // Bucket-major inclusive ends: segment s = j * x + i.
        let by_bucket = transpose(m, group, sizes, x, t)?;
        let ends = prefix_sum(m, group, by_bucket)?;

        let g = group.fit(y, b);
        let slices = block_chunks(out, g.len, b);
        let cuts: Vec<usize> = slices.iter().map(|r| r.start).collect();
        // One record of two words per cut, padded to whole blocks.
        let stride = b * 2usize.div_ceil(b);
        let cut_info = m.alloc(g.len * stride);
        locate_cuts(m, group, ends, &cuts, &slices, cut_info, stride)?;

        for (q, range) in slices.iter().enumerate() {
            if range.is_empty() {
                continue;
            }
            let c = g.core(q);
            let mut s = m.rd(c, cut_info, q * stride)? as usize;
            let mut off = m.rd(c, cut_info, q * stride + 1)? as usize;
            let mut end = m.rd(c, ends, s)? as usize;
            let mut pos = range.start;
            while pos < range.end {
                if pos == end {
                    s += 1;
                    off = 0;
                    end = m.rd(c, ends, s)? as usize;
                    continue;
                }
                let (j, i) = (s / x, s % x);
                let src = runs[i].data;
                let v = m.rd(c, src, runs[i].bounds[j] + off)?;
                m.wr(c, out, pos, v)?;
                off += 1;
                pos += 1;
            }
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(BucketedRun { data: out, bounds: out_bounds })
}

// Every core scans its slice of the segment-end table and records, for each
// cut position falling in one of its segments, the segment and the offset
// inside it. Cut `q`'s record sits at `cut_info[q * stride]`.
fn locate_cuts(
    m: &mut Machine,
    group: Cores,
    ends: MemRegion,
    cuts: &[usize],
    slices: &[std::ops::Range<usize>],
    cut_info: MemRegion,
    stride: usize,
) -> Result<()> {
    let b = m.config().b;
    let segs = ends.len;
    let g = group.fit(segs, b);
    let mut next_cut = 0;
    for (ci, r) in chunk_ranges(segs, g.len).into_iter().enumerate() {
        if r.is_empty() {
            continue;
        }
        let c = g.core(ci);
        let mut start = if r.start == 0 { 0 } else { m.rd(c, ends, r.start - 1)? as usize };
        for s in r {
            let end = m.rd(c, ends, s)? as usize;
            while next_cut < cuts.len() && (slices[next_cut].is_empty() || cuts[next_cut] < end) {
                m.work(c, 1);
                if !slices[next_cut].is_empty() {
                    debug_assert!(cuts[next_cut] >= start);
                    m.wr(c, cut_info, next_cut * stride, s as Word)?;
                    m.wr(c, cut_info, next_cut * stride + 1, (cuts[next_cut] - start) as Word)?;
                }
                next_cut += 1;
            }
            start = end;
        }
    }
    m.barrier(group);
    Ok(())
}

/// Concatenates `lists` in order: a merge where every list is one bucket.
pub fn concat_runs(m: &mut Machine, group: Cores, lists: &[MemRegion]) -> Result<MemRegion> {
    let nonempty: Vec<BucketedRun> = lists.iter().filter(|r| !r.is_empty()).map(|&r| BucketedRun::single(r)).collect();
    match nonempty.len() {
        0 => Ok(m.alloc(0)),
        _ => Ok(merge_bucketed(m, group, &nonempty)?.data),
    }
}
