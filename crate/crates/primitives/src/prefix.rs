//! Inclusive prefix computation over a balanced tree stored in infix order.
//!
//! For `n` (padded to a power of two) leaves, the internal node covering
//! `[lo, lo + size)` stores the fold of its left half at `S[lo + size / 2]`.
//! Subtrees of `n / k` leaves live in one contiguous stretch of `S`, so each
//! of the `k` cores works in its own blocks; only the `log k` upper levels
//! need cross-core rounds.

use pem_machine::{Cores, Machine, MemRegion, Word};

use crate::util::with_scratch;
use crate::Result;

/// `R[i] = a[0] op a[1] op ... op a[i]` for an associative `op` with
/// `identity`. Positions past `a.len` up to the next power of two are treated
/// as `identity` without being stored.
pub fn prefix_scan(
    m: &mut Machine,
    group: Cores,
    a: MemRegion,
    op: &dyn Fn(Word, Word) -> Word,
    identity: Word,
) -> Result<MemRegion> {
    let n = a.len;
    let r = m.alloc(n);
    if n == 0 {
        return Ok(r);
    }
    let b = m.config().b;
    let n2 = n.next_power_of_two();
    let g = group.fit(n2, b).pow2();
    let k = g.len;
    let leaves = n2 / k;
    let sc = Scan { a, op, identity, n };

    with_scratch(m, |m| -> Result<()> {
        let s = m.alloc(n2);
        let t = m.alloc(k * b);

        // Phase 1: subtree folds, bottom-up.
        for i in 0..k {
            let c = g.core(i);
            let total = sc.up(m, c, s, i * leaves, leaves)?;
            m.wr(c, t, i * b, total)?;
        }
        m.barrier(group);
        let mut step = 1;
        while step < k {
            for i in (0..k).step_by(2 * step) {
                let c = g.core(i);
                let j = i + step;
                let left = m.rd(c, t, i * b)?;
                let right = m.rd(c, t, j * b)?;
                m.wr(c, s, j * leaves, left)?;
                m.work(c, 1);
                m.wr(c, t, i * b, op(left, right))?;
            }
            m.barrier(group);
            step *= 2;
        }

        // Phase 2: carries flow top-down; a core's carry is the fold of all
        // leaves left of its subtree.
        let carries = m.alloc(k * b);
        let mut stored = vec![false; k];
        let mut step = k / 2;
        while step >= 1 {
            for i in (0..k).step_by(2 * step) {
                let c = g.core(i);
                let j = i + step;
                let carry = if stored[i] { m.rd(c, carries, i * b)? } else { identity };
                let left = m.rd(c, s, j * leaves)?;
                m.work(c, 1);
                m.wr(c, carries, j * b, op(carry, left))?;
                stored[j] = true;
            }
            m.barrier(group);
            step /= 2;
        }
        for (i, &has_carry) in stored.iter().enumerate().take(k) {
            let c = g.core(i);
            let carry = if has_carry { m.rd(c, carries, i * b)? } else { identity };
            sc.down(m, c, s, r, i * leaves, leaves, carry)?;
        }
        m.barrier(group);
        Ok(())
    })?;
    Ok(r)
}

struct Scan<'a> {
    a: MemRegion,
    op: &'a dyn Fn(Word, Word) -> Word,
    identity: Word,
    n: usize,
}

impl Scan<'_> {
    fn up(&self, m: &mut Machine, c: usize, s: MemRegion, lo: usize, size: usize) -> Result<Word> {
        if lo >= self.n {
            return Ok(self.identity);
        }
        if size == 1 {
            return Ok(m.rd(c, self.a, lo)?);
        }
        let h = size / 2;
        let left = self.up(m, c, s, lo, h)?;
        let right = self.up(m, c, s, lo + h, h)?;
        m.wr(c, s, lo + h, left)?;
        m.work(c, 1);
        Ok((self.op)(left, right))
    }

    #[allow(clippy::too_many_arguments)]
    fn down(
        &self,
        m: &mut Machine,
        c: usize,
        s: MemRegion,
        r: MemRegion,
        lo: usize,
        size: usize,
        carry: Word,
    ) -> Result<()> {
        if lo >= self.n {
            return Ok(());
        }
        if size == 1 {
            let v = m.rd(c, self.a, lo)?;
            m.work(c, 1);
            m.wr(c, r, lo, (self.op)(carry, v))?;
            return Ok(());
        }
        let h = size / 2;
        self.down(m, c, s, r, lo, h, carry)?;
        if lo + h < self.n {
            let left = m.rd(c, s, lo + h)?;
            m.work(c, 1);
            self.down(m, c, s, r, lo + h, h, (self.op)(carry, left))?;
        }
        Ok(())
    }
}

/// Inclusive prefix sums.
pub fn prefix_sum(m: &mut Machine, group: Cores, a: MemRegion) -> Result<MemRegion> {
    prefix_scan(m, group, a, &|x, y| x.wrapping_add(y), 0)
}
