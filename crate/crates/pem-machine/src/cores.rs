use std::ops::Range;

/// A contiguous group of cores `[lo, lo + len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cores {
    pub lo: usize,
    pub len: usize,
}

impl Cores {
    pub fn new(lo: usize, len: usize) -> Self {
        assert!(len >= 1, "a core group needs at least one core");
        Cores { lo, len }
    }

    pub fn all(p: usize) -> Self {
        Cores::new(0, p)
    }

    pub fn one(core: usize) -> Self {
        Cores::new(core, 1)
    }

    /// The `i`-th core of the group.
    pub fn core(&self, i: usize) -> usize {
        debug_assert!(i < self.len);
        self.lo + i
    }

    pub fn iter(&self) -> Range<usize> {
        self.lo..self.lo + self.len
    }

    pub fn contains(&self, core: usize) -> bool {
        core >= self.lo && core < self.lo + self.len
    }

    /// The first `k` cores (at least one, at most all).
    pub fn take(&self, k: usize) -> Cores {
        Cores::new(self.lo, k.clamp(1, self.len))
    }

    /// Largest prefix group such that every core gets at least `unit` items of `n`.
    pub fn fit(&self, n: usize, unit: usize) -> Cores {
        self.take(n / unit.max(1))
    }

    /// Largest power-of-two prefix of the group.
    pub fn pow2(&self) -> Cores {
        let mut k = 1;
        while k * 2 <= self.len {
            k *= 2;
        }
        self.take(k)
    }

    pub fn mask(&self) -> u128 {
        let mut m = 0u128;
        for c in self.iter() {
            m |= 1u128 << c;
        }
        m
    }
}

/// Splits `n` items into `parts` contiguous chunks of size `n / parts`; the
/// remainder goes to the last chunk.
pub fn chunk_ranges(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1);
    let base = n / parts;
    (0..parts)
        .map(|i| {
            let lo = i * base;
            let hi = if i + 1 == parts { n } else { lo + base };
            lo..hi
        })
        .collect()
}
