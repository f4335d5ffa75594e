//! Orders on memory words.
//!
//! Algorithms move words around and compare them through a [`KeyOrder`].
//! Words are often handles into a host-side table (keys with their original
//! index, geometric objects), which keeps every record one word wide.

use pem_machine::Word;

/// A strict weak order on words.
pub trait KeyOrder {
    fn less(&self, a: Word, b: Word) -> bool;
}

impl<F: Fn(Word, Word) -> bool> KeyOrder for F {
    fn less(&self, a: Word, b: Word) -> bool {
        self(a, b)
    }
}

/// Words compared as integers.
#[derive(Clone, Copy, Debug, Default)]
pub struct Natural;

impl KeyOrder for Natural {
    fn less(&self, a: Word, b: Word) -> bool {
        a < b
    }
}

/// Words are indices into `keys`; ordered by `(keys[i], i)`, a total order
/// that breaks ties by original position.
#[derive(Clone, Copy, Debug)]
pub struct ByKey<'a>(pub &'a [i64]);

impl KeyOrder for ByKey<'_> {
    fn less(&self, a: Word, b: Word) -> bool {
        let (ka, kb) = (self.0[a as usize], self.0[b as usize]);
        ka < kb || (ka == kb && a < b)
    }
}

/// Handles `0..n` are keys and `n..n+z` are splitters, both drawn from one
/// value table. Equal values order keys before splitters, so a key equal to
/// splitter `i` lands in bucket `i`.
#[derive(Clone, Copy, Debug)]
pub struct KeysThenSplitters<'a> {
    pub values: &'a [i64],
    pub n_keys: usize,
}

impl KeyOrder for KeysThenSplitters<'_> {
    fn less(&self, a: Word, b: Word) -> bool {
        let (va, vb) = (self.values[a as usize], self.values[b as usize]);
        if va != vb {
            return va < vb;
        }
        let sa = a as usize >= self.n_keys;
        let sb = b as usize >= self.n_keys;
        (sa, a) < (sb, b)
    }
}

/// Position-tagged comparison: `a` at index `i` versus `b` at index `j`,
/// falling back to indices when neither word is less. Turns any strict weak
/// order into a total order over positions.
pub fn less_at<O: KeyOrder + ?Sized>(order: &O, a: Word, i: usize, b: Word, j: usize) -> bool {
    if order.less(a, b) {
        true
    } else if order.less(b, a) {
        false
    } else {
        i < j
    }
}
