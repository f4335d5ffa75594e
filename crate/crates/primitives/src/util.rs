use std::ops::Range;

use pem_machine::{chunk_ranges, Cores, Machine, MemRegion};

/// Splits `region` into `parts` chunks whose inner boundaries sit on block
/// boundaries, so cores writing different chunks never share a block. The
/// last chunk takes the remainder; chunks may be empty.
pub fn block_chunks(region: MemRegion, parts: usize, b: usize) -> Vec<Range<usize>> {
    let n = region.len;
    let raw = chunk_ranges(n, parts);
    let snap = |off: usize| -> usize {
        if off == 0 || off >= n {
            return off.min(n);
        }
        let abs = region.base + off;
        (abs.div_ceil(b) * b - region.base).min(n)
    };
    let mut out = Vec::with_capacity(raw.len());
    let mut lo = 0;
    for (i, r) in raw.iter().enumerate() {
        let hi = if i + 1 == raw.len() { n } else { snap(r.end).max(lo) };
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Allocates scratch that lives until the closure returns. Results the caller
/// keeps must be allocated before calling.
pub fn with_scratch<T>(m: &mut Machine, f: impl FnOnce(&mut Machine) -> T) -> T {
    let mark = m.mark();
    let out = f(m);
    m.release(mark);
    out
}

/// Copies `src` into `dst` (same length) with one contiguous chunk per core.
pub fn par_copy(
    m: &mut Machine,
    group: Cores,
    src: MemRegion,
    dst: MemRegion,
) -> Result<(), pem_machine::MachineError> {
    assert_eq!(src.len, dst.len);
    if src.is_empty() {
        return Ok(());
    }
    let b = m.config().b;
    let g = group.fit(src.len, b);
    for (i, r) in block_chunks(dst, g.len, b).into_iter().enumerate() {
        let c = g.core(i);
        for j in r {
            let v = m.rd(c, src, j)?;
            m.wr(c, dst, j, v)?;
        }
    }
    m.barrier(group);
    Ok(())
}

/// `ceil(log2(n))`, with `log2(0) = log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Integer square root (floor).
pub fn isqrt(n: usize) -> usize {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as usize;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}
