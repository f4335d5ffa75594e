//! Splitting a core group between sub-problems in proportion to their sizes.

use pem_machine::{Cores, Machine, Word};

use crate::prefix::prefix_sum;
use crate::util::with_scratch;
use crate::Result;

/// Apportions `total` units by `weights` with largest-remainder rounding:
/// every share is the floor or ceiling of its exact quota and the shares sum
/// to `total` (or to 0 when all weights are 0). Ties go to lower indices.
pub fn largest_remainder(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let t = total as u128;
    let mut shares: Vec<usize> = weights.iter().map(|&w| (t * w as u128 / sum) as usize).collect();
    let given: usize = shares.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Remainders compared exactly as (t * w) mod sum.
    order.sort_by_key(|&i| std::cmp::Reverse(t * weights[i] as u128 % sum));
    for &i in order.iter().take(total - given) {
        shares[i] += 1;
    }
    shares
}

/// One core group per item, sized by `weights`.
///
/// With no more non-empty items than cores, items get disjoint groups of
/// largest-remainder size; an item whose share rounds to zero runs on the
/// core where its weight prefix falls. With more items than cores, the
/// total weight is laid over the group and each item boundary is rounded to
/// the nearest core boundary: items spanning at least half a core get their
/// own cores, and smaller items run, one after the other, on the core
/// holding their midpoint.
pub fn split_cores(group: Cores, weights: &[usize]) -> Vec<Cores> {
    let k = group.len;
    let total: usize = weights.iter().sum();
    if total == 0 {
        return vec![Cores::one(group.lo); weights.len()];
    }
    let scaled = |prefix: usize| prefix as u128 * k as u128;
    let at = |prefix: usize| -> usize { ((scaled(prefix) / total as u128) as usize).min(k - 1) };
    let nearest = |prefix: usize| -> usize { ((scaled(prefix) * 2 + total as u128) / (2 * total as u128)) as usize };
    let positive = weights.iter().filter(|&&w| w > 0).count();
    let mut out = Vec::with_capacity(weights.len());
    let mut prefix = 0;
    if positive <= k {
        let shares = largest_remainder(k, weights);
        let mut cursor = 0;
        for (&w, &s) in weights.iter().zip(&shares) {
            if s > 0 {
                out.push(Cores::new(group.lo + cursor, s));
                cursor += s;
            } else {
                out.push(Cores::one(group.lo + at(prefix)));
            }
            prefix += w;
        }
    } else {
        for &w in weights {
            let (lo, hi) = (nearest(prefix), nearest(prefix + w));
            if hi > lo {
                out.push(Cores::new(group.lo + lo, hi - lo));
            } else {
                let mid = ((scaled(prefix) * 2 + scaled(w)) / (2 * total as u128)) as usize;
                out.push(Cores::one(group.lo + mid.min(k - 1)));
            }
            prefix += w;
        }
    }
    out
}

/// [`split_cores`] after computing the size prefix on the machine, as the
/// algorithms do before handing sub-problems their cores.
pub fn allocate_cores(m: &mut Machine, group: Cores, sizes: &[usize]) -> Result<Vec<Cores>> {
    if sizes.len() > 1 {
        with_scratch(m, |m| -> Result<()> {
            let words: Vec<Word> = sizes.iter().map(|&s| s as Word).collect();
            let r = m.alloc(words.len());
            let c = group.core(0);
            for (i, &w) in words.iter().enumerate() {
                m.wr(c, r, i, w)?;
            }
            m.barrier(group);
            prefix_sum(m, group, r)?;
            Ok(())
        })?;
    }
    Ok(split_cores(group, sizes))
}
