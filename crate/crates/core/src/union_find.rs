//! Interval union-find over `{1, ..., count}`.
//!
//! Every set is a contiguous range named by its largest element. The only
//! merge is "join the set named `p` with the set containing `p + 1`", which
//! is all the s-schedule needs to skip over fully occupied time slots.
//!
//! Backed by union-by-size with path compression, so each operation is
//! `O(alpha(n))` amortized. Names are kept in a separate root-to-max table,
//! which makes the naming contract independent of which root the size
//! heuristic picks.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UnionFindStats {
    pub unions: usize,
    pub finds: usize,
}

// marks an element that no longer names a set
const NOT_A_NAME: u32 = u32::MAX;

// Everything about element i sits in one 16-byte record, so a find touches
// one cache line per step.
#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    // valid at roots
    size: u32,
    // max element of the set, valid at roots
    name: u32,
    // root of the set named i, or NOT_A_NAME
    root_of_name: u32,
}

#[derive(Clone, Debug)]
pub struct IntervalUnionFind {
    // index 0 is unused so that elements keep their 1-based labels
    nodes: Vec<Node>,
    stats: UnionFindStats,
}

impl IntervalUnionFind {
    pub fn new(count: usize) -> Result<Self> {
        if count < 1 {
            return Err(Error::invalid("interval union-find needs at least one element"));
        }
        if count >= NOT_A_NAME as usize {
            return Err(Error::invalid(format!("{count} elements exceed the supported range")));
        }
        let nodes = (0..=count as u32)
            .map(|i| Node {
                parent: i,
                size: 1,
                name: i,
                root_of_name: i,
            })
            .collect();
        Ok(IntervalUnionFind {
            nodes,
            stats: UnionFindStats::default(),
        })
    }

    pub fn count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn stats(&self) -> UnionFindStats {
        self.stats
    }

    /// Name (largest element) of the set containing `i`.
    pub fn find(&mut self, i: usize) -> Result<usize> {
        self.check(i)?;
        self.stats.finds += 1;
        let root = self.root(i as u32);
        Ok(self.nodes[root as usize].name as usize)
    }

    /// Whether `p` currently names a set.
    pub fn is_name(&self, p: usize) -> bool {
        (1..=self.count()).contains(&p) && self.nodes[p].root_of_name != NOT_A_NAME
    }

    /// Merges the set named `p` with the set containing `p + 1` and returns
    /// the merged set's name. Costs one find, for `p + 1`.
    pub fn union_with_next(&mut self, p: usize) -> Result<usize> {
        if !self.is_name(p) {
            return Err(Error::invalid(format!("{p} does not name a set")));
        }
        if p == self.count() {
            return Err(Error::invalid(format!("{p} is the last element; nothing follows it")));
        }
        let left = self.nodes[p].root_of_name;
        self.stats.finds += 1;
        let right = self.root(p as u32 + 1);
        let merged_name = self.nodes[right as usize].name;

        let (big, small) = if self.nodes[left as usize].size >= self.nodes[right as usize].size {
            (left, right)
        } else {
            (right, left)
        };
        let small_size = self.nodes[small as usize].size;
        self.nodes[small as usize].parent = big;
        let big_node = &mut self.nodes[big as usize];
        big_node.size += small_size;
        big_node.name = merged_name;
        self.nodes[merged_name as usize].root_of_name = big;
        self.nodes[p].root_of_name = NOT_A_NAME;
        self.stats.unions += 1;
        Ok(merged_name as usize)
    }

    /// Current partition as `(first, last)` ranges in increasing order.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 1;
        for i in 1..=self.count() {
            if self.nodes[i].root_of_name != NOT_A_NAME {
                out.push((start, i));
                start = i + 1;
            }
        }
        out
    }

    fn check(&self, i: usize) -> Result<()> {
        if (1..=self.count()).contains(&i) {
            Ok(())
        } else {
            Err(Error::invalid(format!("element {i} outside 1..={}", self.count())))
        }
    }

    fn root(&mut self, i: u32) -> u32 {
        let mut root = i;
        while self.nodes[root as usize].parent != root {
            root = self.nodes[root as usize].parent;
        }
        let mut cur = i;
        while self.nodes[cur as usize].parent != root {
            let next = self.nodes[cur as usize].parent;
            self.nodes[cur as usize].parent = root;
            cur = next;
        }
        root
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fresh_structure_is_all_singletons() {
        let mut uf = IntervalUnionFind::new(10).unwrap();
        assert_eq!(uf.ranges(), (1..=10).map(|i| (i, i)).collect::<Vec<_>>());
        assert_eq!(uf.find(3).unwrap(), 3);
        assert_eq!(uf.find(5).unwrap(), 5);
        let single = IntervalUnionFind::new(1).unwrap();
        assert_eq!(single.ranges(), vec![(1, 1)]);
        assert!(IntervalUnionFind::new(0).is_err());
    }

    #[test]
    fn merges_follow_the_worked_trace() {
        // partition {1},{2,3},{4},{5},{6,7,8},{9},{10}
        let mut uf = IntervalUnionFind::new(10).unwrap();
        for p in [2, 6, 7] {
            uf.union_with_next(p).unwrap();
        }
        assert_eq!(
            uf.ranges(),
            vec![(1, 1), (2, 3), (4, 4), (5, 5), (6, 8), (9, 9), (10, 10)]
        );
        assert_eq!(uf.find(3).unwrap(), 3);
        assert_eq!(uf.find(2).unwrap(), 3);

        assert_eq!(uf.union_with_next(3).unwrap(), 4);
        assert_eq!(uf.union_with_next(4).unwrap(), 5);
        assert_eq!(uf.union_with_next(5).unwrap(), 8);
        assert_eq!(uf.find(3).unwrap(), 8);
        assert_eq!(uf.ranges()[1], (2, 8));
    }

    #[test]
    fn union_of_two() {
        let mut uf = IntervalUnionFind::new(2).unwrap();
        assert_eq!(uf.union_with_next(1).unwrap(), 2);
        assert_eq!(uf.stats(), UnionFindStats { unions: 1, finds: 1 });
    }

    #[test]
    fn invalid_operations_are_rejected() {
        let mut uf = IntervalUnionFind::new(4).unwrap();
        assert!(uf.find(0).is_err());
        assert!(uf.find(5).is_err());
        assert!(uf.union_with_next(4).is_err());
        uf.union_with_next(1).unwrap();
        // 1 no longer names a set
        assert!(uf.union_with_next(1).is_err());
        assert_eq!(uf.stats().unions, 1);
    }

    /// Array-of-labels reference: label[i] is the name of i's set.
    struct Naive {
        label: Vec<usize>,
    }

    impl Naive {
        fn new(count: usize) -> Self {
            Naive {
                label: (0..=count).collect(),
            }
        }

        fn union_with_next(&mut self, p: usize) -> usize {
            let target = self.label[p + 1];
            for l in self.label.iter_mut() {
                if *l == p {
                    *l = target;
                }
            }
            target
        }
    }

    proptest! {
        #[test]
        fn agrees_with_label_array(count in 1usize..60, ops in prop::collection::vec((any::<bool>(), 1usize..60), 0..200)) {
            let mut uf = IntervalUnionFind::new(count).unwrap();
            let mut naive = Naive::new(count);
            let mut last_find = vec![0usize; count + 1];
            for (is_union, raw) in ops {
                let i = 1 + (raw - 1) % count;
                if is_union {
                    let p = naive.label[i];
                    if p < count {
                        prop_assert_eq!(uf.union_with_next(p).unwrap(), naive.union_with_next(p));
                    }
                } else {
                    let got = uf.find(i).unwrap();
                    prop_assert_eq!(got, naive.label[i]);
                    prop_assert!(got >= i);
                    prop_assert!(got >= last_find[i]);
                    last_find[i] = got;
                }
                for (lo, hi) in uf.ranges() {
                    for j in lo..=hi {
                        prop_assert_eq!(naive.label[j], hi);
                    }
                }
            }
            prop_assert!(uf.stats().unions < count);
        }
    }
}
