use crate::Real;

const ABSENT: usize = usize::MAX;

/// Binary min-heap of `(value, node)` with a position map for decrease-key.
///
/// Entries compare by value and then by node index, so the pop order is fully
/// determined by the inputs.
#[derive(Debug, Clone, Default)]
pub struct ConsideredHeap<T> {
    entries: Vec<(T, usize)>,
    position: Vec<usize>,
}

#[inline]
fn less<T: Real>(a: &(T, usize), b: &(T, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl<T: Real> ConsideredHeap<T> {
    pub fn new(nodes: usize) -> Self {
        Self {
            entries: Vec::new(),
            position: vec![ABSENT; nodes],
        }
    }

    /// Empties the heap and resizes the position map for `nodes` nodes.
    pub fn reset(&mut self, nodes: usize) {
        self.entries.clear();
        self.position.clear();
        self.position.resize(nodes, ABSENT);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.position[node] != ABSENT
    }

    /// Current key of `node`, if it is in the heap.
    pub fn key(&self, node: usize) -> Option<T> {
        let p = self.position[node];
        (p != ABSENT).then(|| self.entries[p].0)
    }

    pub fn peek(&self) -> Option<(T, usize)> {
        self.entries.first().copied()
    }

    /// Inserts `node`, or lowers its key if `value` is smaller than the
    /// stored one. Returns whether the heap changed.
    pub fn push_or_decrease(&mut self, node: usize, value: T) -> bool {
        debug_assert!(!value.is_nan());
        let p = self.position[node];
        if p == ABSENT {
            self.entries.push((value, node));
            let last = self.entries.len() - 1;
            self.position[node] = last;
            self.sift_up(last);
            true
        } else if value < self.entries[p].0 {
            self.entries[p].0 = value;
            self.sift_up(p);
            true
        } else {
            false
        }
    }

    pub fn pop(&mut self) -> Option<(T, usize)> {
        if self.entries.is_empty() {
            return None;
        }
        let top = self.entries.swap_remove(0);
        self.position[top.1] = ABSENT;
        if !self.entries.is_empty() {
            self.position[self.entries[0].1] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !less(&self.entries[i], &self.entries[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.entries.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && less(&self.entries[r], &self.entries[l]) {
                r
            } else {
                l
            };
            if !less(&self.entries[child], &self.entries[i]) {
                break;
            }
            self.swap(i, child);
            i = child;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.entries.swap(a, b);
        self.position[self.entries[a].1] = a;
        self.position[self.entries[b].1] = b;
    }

    #[cfg(test)]
    fn check(&self) {
        for (i, e) in self.entries.iter().enumerate() {
            assert_eq!(self.position[e.1], i);
            if i > 0 {
                assert!(!less(e, &self.entries[(i - 1) / 2]));
            }
        }
        let present = self.position.iter().filter(|&&p| p != ABSENT).count();
        assert_eq!(present, self.entries.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_pop_by_index() {
        let mut h = ConsideredHeap::new(5);
        for n in [3, 1, 4, 0] {
            h.push_or_decrease(n, 1.0);
        }
        let order: Vec<_> = std::iter::from_fn(|| h.pop()).map(|e| e.1).collect();
        assert_eq!(order, [0, 1, 3, 4]);
    }

    #[test]
    fn decrease_key_only_lowers() {
        let mut h = ConsideredHeap::new(3);
        h.push_or_decrease(0, 2.0);
        h.push_or_decrease(1, 1.0);
        assert!(!h.push_or_decrease(0, 3.0));
        assert!(h.push_or_decrease(0, 0.5));
        assert_eq!(h.key(0), Some(0.5));
        assert_eq!(h.pop(), Some((0.5, 0)));
        assert!(!h.contains(0));
    }

    proptest! {
        #[test]
        fn pops_sorted_after_random_operations(ops in prop::collection::vec((0usize..40, 0u32..1000), 1..300)) {
            let mut h = ConsideredHeap::new(40);
            let mut best = vec![f64::INFINITY; 40];
            for (node, v) in ops {
                let v = v as f64 / 10.0;
                h.push_or_decrease(node, v);
                best[node] = best[node].min(v);
                h.check();
            }
            let mut last = (f64::NEG_INFINITY, 0usize);
            let mut seen = 0;
            while let Some(e) = h.pop() {
                h.check();
                prop_assert!(!less(&e, &last));
                prop_assert_eq!(e.0, best[e.1]);
                last = e;
                seen += 1;
            }
            prop_assert_eq!(seen, best.iter().filter(|v| v.is_finite()).count());
        }
    }
}
