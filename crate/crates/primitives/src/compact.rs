use pem_machine::{Cores, Machine, MachineError, MemRegion};

use crate::util::block_chunks;
use crate::Result;

/// Writes the concatenation of `parts` to the front of `dest`.
///
/// The output is cut into one block-aligned chunk per core; a core reads
/// whatever parts feed its chunk, so every output block has one writer.
pub fn compact(m: &mut Machine, group: Cores, parts: &[MemRegion], dest: MemRegion) -> Result<MemRegion> {
    let n: usize = parts.iter().map(|r| r.len).sum();
    if n > dest.len {
        return Err(MachineError::OutOfRegion { index: n - 1, len: dest.len }.into());
    }
    let out = dest.slice(0, n);
    if n == 0 {
        return Ok(out);
    }
    let b = m.config().b;
    let g = group.fit(n, b);
    let mut starts = Vec::with_capacity(parts.len() + 1);
    let mut acc = 0;
    for r in parts {
        starts.push(acc);
        acc += r.len;
    }
    starts.push(acc);
    for (i, range) in block_chunks(out, g.len, b).into_iter().enumerate() {
        if range.is_empty() {
            continue;
        }
        let c = g.core(i);
        // Last part starting at or before the chunk start.
        let mut part = starts.partition_point(|&s| s <= range.start) - 1;
        for pos in range {
            while pos >= starts[part + 1] {
                part += 1;
            }
            let v = m.rd(c, parts[part], pos - starts[part])?;
            m.wr(c, out, pos, v)?;
        }
    }
    m.barrier(group);
    Ok(out)
}

/// [`compact`] into a freshly allocated region.
pub fn compact_new(m: &mut Machine, group: Cores, parts: &[MemRegion]) -> Result<MemRegion> {
    let n = parts.iter().map(|r| r.len).sum();
    let dest = m.alloc(n);
    compact(m, group, parts, dest)
}
