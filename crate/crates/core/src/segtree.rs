//! Max segment tree over key columns with "next position above a threshold"
//! searches in either direction.

pub(crate) const EMPTY: i64 = i64::MIN;

#[derive(Clone, Debug)]
pub(crate) struct MaxTree {
    size: usize,
    tree: Vec<i64>,
}

impl MaxTree {
    /// Covers positions `0..len`.
    pub(crate) fn new(len: usize) -> Self {
        let size = len.max(1).next_power_of_two();
        MaxTree {
            size,
            tree: vec![EMPTY; 2 * size],
        }
    }

    pub(crate) fn get(&self, i: usize) -> i64 {
        self.tree[self.size + i]
    }

    pub(crate) fn set(&mut self, i: usize, v: i64) {
        let mut n = self.size + i;
        self.tree[n] = v;
        while n > 1 {
            n /= 2;
            self.tree[n] = self.tree[2 * n].max(self.tree[2 * n + 1]);
        }
    }

    /// Smallest position in `lo..hi` whose value exceeds `threshold`.
    pub(crate) fn first_above(&self, lo: usize, hi: usize, threshold: i64) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        self.first_in(1, 0, self.size, lo, hi, threshold)
    }

    fn first_in(&self, node: usize, nl: usize, nr: usize, lo: usize, hi: usize, th: i64) -> Option<usize> {
        if nr <= lo || hi <= nl || self.tree[node] <= th {
            return None;
        }
        if nr - nl == 1 {
            return Some(nl);
        }
        let mid = (nl + nr) / 2;
        self.first_in(2 * node, nl, mid, lo, hi, th)
            .or_else(|| self.first_in(2 * node + 1, mid, nr, lo, hi, th))
    }

    /// Largest position in `lo..hi` whose value exceeds `threshold`.
    pub(crate) fn last_above(&self, lo: usize, hi: usize, threshold: i64) -> Option<usize> {
        if lo >= hi {
            return None;
        }
        self.last_in(1, 0, self.size, lo, hi, threshold)
    }

    fn last_in(&self, node: usize, nl: usize, nr: usize, lo: usize, hi: usize, th: i64) -> Option<usize> {
        if nr <= lo || hi <= nl || self.tree[node] <= th {
            return None;
        }
        if nr - nl == 1 {
            return Some(nl);
        }
        let mid = (nl + nr) / 2;
        self.last_in(2 * node + 1, mid, nr, lo, hi, th)
            .or_else(|| self.last_in(2 * node, nl, mid, lo, hi, th))
    }
}
