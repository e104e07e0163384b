//! Segment-sum tree for O(log N) weighted sampling over firm slots.
//!
//! Every update recomputes each ancestor as the sum of its two children
//! instead of applying deltas, so each internal node is always an exact
//! function of the current leaves: nodes[p] == nodes[2p] + nodes[2p+1]
//! bit-for-bit. Two consequences this crate relies on:
//!
//! - total() never drifts from the tree-order sum of the leaves, no matter
//!   how many updates have been applied;
//! - a tree rebuilt from a snapshot of the leaves is identical to the
//!   incrementally maintained one, which is what makes resumed runs
//!   byte-identical to uninterrupted ones.

/// Non-negative leaf weights over slots 0..len; slots are append-only.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTree {
    /// Power of two; leaves live at nodes[cap..cap + len].
    cap: usize,
    len: usize,
    /// nodes[1] is the root (total); nodes[0] is unused.
    nodes: Vec<f64>,
}

impl WeightTree {
    pub fn with_capacity(hint: usize) -> Self {
        let cap = hint.next_power_of_two().max(1);
        WeightTree {
            cap,
            len: 0,
            nodes: vec![0.0; 2 * cap],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of all leaf weights (the root node).
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, slot: usize) -> f64 {
        assert!(slot < self.len, "slot {slot} out of {}", self.len);
        self.nodes[self.cap + slot]
    }

    /// Appends a slot with the given weight and returns its index.
    pub fn push(&mut self, weight: f64) -> usize {
        debug_assert!(weight >= 0.0);
        if self.len == self.cap {
            self.grow();
        }
        let slot = self.len;
        self.len += 1;
        self.set(slot, weight);
        slot
    }

    pub fn set(&mut self, slot: usize, weight: f64) {
        assert!(slot < self.len, "slot {slot} out of {}", self.len);
        debug_assert!(weight >= 0.0 && weight.is_finite());
        let mut node = self.cap + slot;
        self.nodes[node] = weight;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    fn grow(&mut self) {
        let new_cap = self.cap * 2;
        let mut nodes = vec![0.0; 2 * new_cap];
        nodes[new_cap..new_cap + self.len]
            .copy_from_slice(&self.nodes[self.cap..self.cap + self.len]);
        for p in (1..new_cap).rev() {
            nodes[p] = nodes[2 * p] + nodes[2 * p + 1];
        }
        self.cap = new_cap;
        self.nodes = nodes;
    }

    /// Maps a uniform draw u in [0, 1) to a slot with probability
    /// weight/total. None when all weights are zero. If float rounding lands
    /// the descent on a zero-weight leaf (possible when u*total falls exactly
    /// on a subtree boundary), the next positive slot in wrapping order is
    /// taken; the fallback is deterministic in u.
    pub fn sample(&self, u: f64) -> Option<usize> {
        debug_assert!((0.0..1.0).contains(&u));
        let total = self.total();
        // Also refuses a NaN total; comparison order matters.
        if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return None;
        }
        let mut target = u * total;
        let mut node = 1;
        while node < self.cap {
            let left = 2 * node;
            if target < self.nodes[left] {
                node = left;
            } else {
                target -= self.nodes[left];
                node = left + 1;
            }
        }
        let slot = node - self.cap;
        if slot < self.len && self.nodes[node] > 0.0 {
            return Some(slot);
        }
        (1..self.len)
            .map(|d| (slot + d) % self.len)
            .find(|&s| self.nodes[self.cap + s] > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Sums leaves in the same pairwise order the tree uses.
    fn tree_order_sum(leaves: &[f64], cap: usize) -> f64 {
        let mut level: Vec<f64> = (0..cap)
            .map(|i| leaves.get(i).copied().unwrap_or(0.0))
            .collect();
        while level.len() > 1 {
            level = level.chunks(2).map(|c| c[0] + c[1]).collect();
        }
        level[0]
    }

    #[test]
    fn push_set_get_round_trip() {
        let mut t = WeightTree::with_capacity(2);
        assert_eq!(t.push(3.0), 0);
        assert_eq!(t.push(1.0), 1);
        assert_eq!(t.push(4.0), 2); // forces a grow
        assert_eq!(t.get(0), 3.0);
        assert_eq!(t.get(2), 4.0);
        assert_eq!(t.total(), 8.0);
        t.set(1, 2.0);
        assert_eq!(t.total(), 9.0);
    }

    #[test]
    fn sampling_matches_weights_on_a_uniform_grid() {
        let mut t = WeightTree::with_capacity(4);
        for w in [1.0, 2.0, 3.0, 4.0] {
            t.push(w);
        }
        let n = 10_000;
        let mut counts = [0usize; 4];
        for k in 0..n {
            let u = (k as f64 + 0.5) / n as f64;
            counts[t.sample(u).unwrap()] += 1;
        }
        // grid sampling turns probabilities into interval lengths, so counts
        // are exact up to boundary rounding
        for (i, &c) in counts.iter().enumerate() {
            let expected = (i + 1) * 1000;
            assert!(
                (c as i64 - expected as i64).abs() <= 2,
                "slot {i}: {c} vs {expected}"
            );
        }
    }

    #[test]
    fn zero_weight_slots_are_never_sampled() {
        let mut t = WeightTree::with_capacity(4);
        for w in [0.0, 5.0, 0.0, 7.0] {
            t.push(w);
        }
        for k in 0..1000 {
            let u = (k as f64 + 0.5) / 1000.0;
            let s = t.sample(u).unwrap();
            assert!(s == 1 || s == 3, "sampled zero-weight slot {s}");
        }
    }

    #[test]
    fn all_zero_returns_none() {
        let mut t = WeightTree::with_capacity(2);
        t.push(0.0);
        t.push(0.0);
        assert_eq!(t.sample(0.5), None);
        let empty = WeightTree::with_capacity(8);
        assert_eq!(empty.sample(0.5), None);
    }

    proptest! {
        // root == tree-order leaf sum exactly, across pushes, sets and grows
        #[test]
        fn total_is_exact_tree_sum(
            weights in proptest::collection::vec(0.0f64..1e6, 1..70),
            updates in proptest::collection::vec((0usize..70, 0.0f64..1e6), 0..20),
        ) {
            let mut t = WeightTree::with_capacity(1);
            let mut leaves = Vec::new();
            for &w in &weights {
                t.push(w);
                leaves.push(w);
            }
            for &(slot, w) in &updates {
                let slot = slot % leaves.len();
                t.set(slot, w);
                leaves[slot] = w;
            }
            let expected = tree_order_sum(&leaves, leaves.len().next_power_of_two());
            prop_assert_eq!(t.total(), expected);

            // a tree rebuilt from the final leaves is bit-identical
            let mut rebuilt = WeightTree::with_capacity(leaves.len());
            for &w in &leaves {
                rebuilt.push(w);
            }
            prop_assert_eq!(&t.nodes[1..], &rebuilt.nodes[1..]);
        }
    }
}
