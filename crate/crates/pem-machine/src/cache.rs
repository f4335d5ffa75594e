use std::num::NonZeroUsize;

use lru::LruCache;

/// Outcome of touching a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Touch {
    Hit,
    Miss { evicted: Option<u64> },
}

/// One core's private cache: fully associative, LRU, capacity in blocks.
pub(crate) struct CoreCache {
    lru: LruCache<u64, ()>,
    // Most recently used block; lets sequential scans skip the hash lookup.
    mru: Option<u64>,
}

impl CoreCache {
    pub(crate) fn new(blocks: usize) -> Self {
        let cap = NonZeroUsize::new(blocks.max(1)).expect("nonzero");
        CoreCache { lru: LruCache::new(cap), mru: None }
    }

    pub(crate) fn touch(&mut self, block: u64) -> Touch {
        if self.mru == Some(block) {
            return Touch::Hit;
        }
        self.mru = Some(block);
        if self.lru.get(&block).is_some() {
            return Touch::Hit;
        }
        let evicted = self.lru.push(block, ()).map(|(k, _)| k);
        Touch::Miss { evicted }
    }

    pub(crate) fn invalidate(&mut self, block: u64) {
        if self.mru == Some(block) {
            self.mru = None;
        }
        self.lru.pop(&block);
    }

    pub(crate) fn contains(&self, block: u64) -> bool {
        self.lru.contains(&block)
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.lru.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lru_order_and_capacity() {
        let mut c = CoreCache::new(2);
        assert_eq!(c.touch(1), Touch::Miss { evicted: None });
        assert_eq!(c.touch(2), Touch::Miss { evicted: None });
        assert_eq!(c.touch(1), Touch::Hit);
        // 2 is now least recently used.
        assert_eq!(c.touch(3), Touch::Miss { evicted: Some(2) });
        assert!(c.contains(1) && c.contains(3) && !c.contains(2));
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn invalidation_clears_fast_path() {
        let mut c = CoreCache::new(4);
        c.touch(7);
        c.invalidate(7);
        assert_eq!(c.touch(7), Touch::Miss { evicted: None });
    }
}
