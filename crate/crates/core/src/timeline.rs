//! Order-preserving timeline compression.
//!
//! Once a region of time has been handed to faster jobs, the remaining jobs
//! are solved on a timeline with that region collapsed to a point. A
//! [`Timeline`] records the collapsed regions in original coordinates so that
//! segments found on a compressed timeline can be mapped back.

use crate::model::merge_sorted_intervals;
use crate::num::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Timeline<T> {
    // sorted, pairwise separated, in original coordinates
    removed: Vec<(T, T)>,
    // local point each region collapses to
    collapse_at: Vec<T>,
    // total removed length strictly before region i
    removed_before: Vec<T>,
}

impl<T: Scalar> Default for Timeline<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Scalar> Timeline<T> {
    pub fn identity() -> Self {
        Timeline {
            removed: Vec::new(),
            collapse_at: Vec::new(),
            removed_before: Vec::new(),
        }
    }

    fn from_removed(removed: Vec<(T, T)>) -> Self {
        let mut collapse_at = Vec::with_capacity(removed.len());
        let mut removed_before = Vec::with_capacity(removed.len());
        let mut acc = T::zero();
        for (lo, hi) in &removed {
            collapse_at.push(lo.clone() - acc.clone());
            removed_before.push(acc.clone());
            acc = acc + (hi.clone() - lo.clone());
        }
        Timeline {
            removed,
            collapse_at,
            removed_before,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.removed.is_empty()
    }

    /// Collapsed regions in original coordinates.
    pub fn removed(&self) -> &[(T, T)] {
        &self.removed
    }

    /// Local coordinate of an original time.
    pub fn to_local(&self, t: &T) -> T {
        let mut before = T::zero();
        for (i, (lo, hi)) in self.removed.iter().enumerate() {
            if hi.is_le(t) {
                before = self.removed_before[i].clone() + (hi.clone() - lo.clone());
            } else if lo.is_lt(t) {
                return self.collapse_at[i].clone();
            } else {
                break;
            }
        }
        t.clone() - before
    }

    /// Original intervals covered by the local interval `[x, y)`, in order.
    pub fn to_original(&self, x: &T, y: &T) -> Vec<(T, T)> {
        let mut out = Vec::new();
        // regions collapsing at or before x lie before the interval
        let mut idx = self.collapse_at.partition_point(|c| c.is_le(x));
        let mut offset = match idx {
            0 => T::zero(),
            i => self.removed_before[i - 1].clone() + self.region_len(i - 1),
        };
        let mut cur = x.clone();
        while cur.is_lt(y) {
            let brk = match self.collapse_at.get(idx) {
                Some(c) if c.is_lt(y) => c.clone(),
                _ => y.clone(),
            };
            if cur.is_lt(&brk) {
                out.push((cur.clone() + offset.clone(), brk.clone() + offset.clone()));
            }
            if brk.is_ge(y) {
                break;
            }
            offset = offset + self.region_len(idx);
            cur = brk;
            idx += 1;
        }
        out
    }

    /// Collapses further regions, given in this timeline's local
    /// coordinates (sorted, disjoint).
    pub fn excise(&self, local: &[(T, T)]) -> Timeline<T> {
        let mut spans = Vec::with_capacity(local.len());
        let mut strict = 0; // regions collapsing strictly before x
        let mut upto = 0; // regions collapsing at or before y
        let prefix = |count: usize| match count {
            0 => T::zero(),
            i => self.removed_before[i - 1].clone() + self.region_len(i - 1),
        };
        for (x, y) in local {
            while strict < self.collapse_at.len() && self.collapse_at[strict].is_lt(x) {
                strict += 1;
            }
            upto = upto.max(strict);
            while upto < self.collapse_at.len() && self.collapse_at[upto].is_le(y) {
                upto += 1;
            }
            spans.push((x.clone() + prefix(strict), y.clone() + prefix(upto)));
        }
        let mut merged = Vec::with_capacity(spans.len() + self.removed.len());
        let (mut a, mut b) = (self.removed.iter().peekable(), spans.into_iter().peekable());
        loop {
            let take_old = match (a.peek(), b.peek()) {
                (Some(old), Some(new)) => old.0.is_le(&new.0),
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            if take_old {
                merged.push(a.next().cloned().unwrap());
            } else {
                merged.push(b.next().unwrap());
            }
        }
        Timeline::from_removed(merge_sorted_intervals(merged))
    }

    fn region_len(&self, i: usize) -> T {
        self.removed[i].1.clone() - self.removed[i].0.clone()
    }
}

/// Maps a non-decreasing sequence of local points through the collapse of
/// `regions` (sorted, disjoint, local coordinates) in one forward sweep.
pub struct Collapser<'a, T> {
    regions: &'a [(T, T)],
    idx: usize,
    before: T,
}

impl<'a, T: Scalar> Collapser<'a, T> {
    pub fn new(regions: &'a [(T, T)]) -> Self {
        Collapser {
            regions,
            idx: 0,
            before: T::zero(),
        }
    }

    pub fn map(&mut self, t: &T) -> T {
        while let Some((lo, hi)) = self.regions.get(self.idx) {
            if hi.is_le(t) {
                self.before = self.before.clone() + (hi.clone() - lo.clone());
                self.idx += 1;
            } else if lo.is_lt(t) {
                return lo.clone() - self.before.clone();
            } else {
                break;
            }
        }
        t.clone() - self.before.clone()
    }
}
