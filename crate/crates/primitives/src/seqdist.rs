//! Single-core distribution sort.
//!
//! A random sample of `4 * ceil(n^(1/4))` keys is sorted recursively and
//! every fourth sample key becomes a splitter. The top level distributes
//! from the source into the destination with a counting pass and a placement
//! pass; deeper levels permute buckets in place, so a sub-problem that fits
//! in cache is loaded once. Runs of at most 16 keys use insertion sort.
//! Heavily duplicated inputs fall back to merge sort.

use pem_machine::{chunk_ranges, Machine, MemRegion, Word};

use crate::order::KeyOrder;
use crate::rng::{PemRng, Stream};
use crate::sample::splitter_count;
use crate::seqsort::merge_sort_seq;
use crate::util::with_scratch;
use crate::Result;

const INSERTION_MAX: usize = 16;
const FANOUT_EXPONENT: u32 = 4;
const OVERSAMPLE: usize = 4;

/// Sorts `a` into a fresh region on one core.
pub fn seq_sort<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    a: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> Result<MemRegion> {
    let out = m.alloc(a.len);
    seq_sort_into(m, core, a, out, order, rng)?;
    Ok(out)
}

/// Sorts `src` into `dst` (same length) on one core. Not stable.
pub fn seq_sort_into<O: KeyOrder + ?Sized>(
    m: &mut Machine,
    core: usize,
    src: MemRegion,
    dst: MemRegion,
    order: &O,
    rng: &mut PemRng,
) -> Result<()> {
    assert_eq!(src.len, dst.len);
    let mut sorter = Sorter { core, order, stream: rng.stream(), draws: 0 };
    sorter.sort_into(m, src, dst)
}

struct Sorter<'a, O: ?Sized> {
    core: usize,
    order: &'a O,
    stream: Stream,
    draws: u64,
}

impl<O: KeyOrder + ?Sized> Sorter<'_, O> {
    fn copy(&self, m: &mut Machine, src: MemRegion, dst: MemRegion) -> Result<()> {
        for i in 0..src.len {
            let v = m.rd(self.core, src, i)?;
            m.wr(self.core, dst, i, v)?;
        }
        Ok(())
    }

    fn sort_into(&mut self, m: &mut Machine, src: MemRegion, dst: MemRegion) -> Result<()> {
        let n = src.len;
        if n <= INSERTION_MAX {
            self.copy(m, src, dst)?;
            return self.insertion(m, dst);
        }
        let c = self.core;
        let sizes = with_scratch(m, |m| -> Result<Option<Vec<usize>>> {
            let spl = self.splitters(m, src)?;
            let counts = m.alloc(spl.len + 1);
            let sizes = self.count(m, src, spl, counts)?;
            if skewed(&sizes, n) {
                self.copy(m, src, dst)?;
                merge_sort_seq(m, c, dst, self.order)?;
                return Ok(None);
            }
            for i in 0..n {
                let key = m.rd(c, src, i)?;
                let b = self.bucket_of(m, spl, key)?;
                let pos = m.rd(c, counts, b)?;
                m.wr(c, counts, b, pos + 1)?;
                m.wr(c, dst, pos as usize, key)?;
            }
            Ok(Some(sizes))
        })?;
        self.recurse(m, dst, sizes)
    }

    fn sort_in_place(&mut self, m: &mut Machine, r: MemRegion) -> Result<()> {
        let n = r.len;
        if n <= INSERTION_MAX {
            return self.insertion(m, r);
        }
        let c = self.core;
        let sizes = with_scratch(m, |m| -> Result<Option<Vec<usize>>> {
            let spl = self.splitters(m, r)?;
            let next = m.alloc(spl.len + 1);
            let sizes = self.count(m, r, spl, next)?;
            if skewed(&sizes, n) {
                merge_sort_seq(m, c, r, self.order)?;
                return Ok(None);
            }
            // Cycle each misplaced key to the next free slot of its bucket.
            let mut end = 0;
            for (b, &z) in sizes.iter().enumerate() {
                end += z;
                loop {
                    let i = m.rd(c, next, b)? as usize;
                    if i >= end {
                        break;
                    }
                    let mut v = m.rd(c, r, i)?;
                    let mut vb = self.bucket_of(m, spl, v)?;
                    while vb != b {
                        let j = m.rd(c, next, vb)? as usize;
                        m.wr(c, next, vb, j as Word + 1)?;
                        let t = m.rd(c, r, j)?;
                        m.wr(c, r, j, v)?;
                        v = t;
                        vb = self.bucket_of(m, spl, v)?;
                    }
                    m.wr(c, r, i, v)?;
                    m.wr(c, next, b, i as Word + 1)?;
                }
            }
            Ok(Some(sizes))
        })?;
        self.recurse(m, r, sizes)
    }

    fn recurse(&mut self, m: &mut Machine, r: MemRegion, sizes: Option<Vec<usize>>) -> Result<()> {
        let mut lo = 0;
        for z in sizes.unwrap_or_default() {
            if z > 1 {
                self.sort_in_place(m, r.slice(lo, z))?;
            }
            lo += z;
        }
        Ok(())
    }

    /// Sorted splitters drawn from `r`, in a fresh region.
    fn splitters(&mut self, m: &mut Machine, r: MemRegion) -> Result<MemRegion> {
        let c = self.core;
        let n = r.len;
        let s = splitter_count(n, FANOUT_EXPONENT);
        let k = (OVERSAMPLE * s).min(n);
        let spl = m.alloc(s);
        with_scratch(m, |m| -> Result<()> {
            let sample = m.alloc(k);
            for (j, ch) in chunk_ranges(n, k).into_iter().enumerate() {
                let pick = ch.start + self.stream.below(self.draws + j as u64, ch.len() as u64) as usize;
                let v = m.rd(c, r, pick)?;
                m.wr(c, sample, j, v)?;
            }
            self.draws += k as u64;
            self.sort_in_place(m, sample)?;
            for i in 1..=s {
                let v = m.rd(c, sample, (i * k).div_ceil(s) - 1)?;
                m.wr(c, spl, i - 1, v)?;
            }
            Ok(())
        })?;
        Ok(spl)
    }

    /// Bucket sizes of `r`; leaves each bucket's start offset in `starts`.
    fn count(&self, m: &mut Machine, r: MemRegion, spl: MemRegion, starts: MemRegion) -> Result<Vec<usize>> {
        let c = self.core;
        for i in 0..r.len {
            let key = m.rd(c, r, i)?;
            let b = self.bucket_of(m, spl, key)?;
            let cnt = m.rd(c, starts, b)?;
            m.wr(c, starts, b, cnt + 1)?;
        }
        let mut sizes = Vec::with_capacity(starts.len);
        let mut acc = 0;
        for b in 0..starts.len {
            let cnt = m.rd(c, starts, b)?;
            m.wr(c, starts, b, acc)?;
            sizes.push(cnt as usize);
            acc += cnt;
        }
        Ok(sizes)
    }

    /// Number of splitters strictly below `key`.
    fn bucket_of(&self, m: &mut Machine, spl: MemRegion, key: Word) -> Result<usize> {
        let (mut lo, mut hi) = (0, spl.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let s = m.rd(self.core, spl, mid)?;
            m.work(self.core, 1);
            if self.order.less(s, key) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    fn insertion(&self, m: &mut Machine, r: MemRegion) -> Result<()> {
        let c = self.core;
        for i in 1..r.len {
            let v = m.rd(c, r, i)?;
            let mut j = i;
            while j > 0 {
                let u = m.rd(c, r, j - 1)?;
                m.work(c, 1);
                if !self.order.less(v, u) {
                    break;
                }
                m.wr(c, r, j, u)?;
                j -= 1;
            }
            if j != i {
                m.wr(c, r, j, v)?;
            }
        }
        Ok(())
    }
}

/// Heavy duplicates: distribution would barely shrink the problem.
fn skewed(sizes: &[usize], n: usize) -> bool {
    sizes.iter().any(|&z| z > n - n / 8)
}
