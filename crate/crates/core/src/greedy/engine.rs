use std::collections::BTreeSet;
use std::sync::Arc;

use crate::model::{Key, OpKind, PointSet, Time, UpdateSequence};
use crate::segtree::MaxTree;

/// Incremental GREEDY. Each column keeps the encoded row of its highest point
/// (`2s`, or `2s - 1` for a deletion) in a max segment tree, so a stair is the
/// run of prefix maxima met when walking away from its owner, and each member
/// costs one tree descent.
pub struct GreedyEngine {
    seq: Arc<UpdateSequence>,
    tops: MaxTree,
    live: BTreeSet<Key>,
    rows: Vec<Vec<Key>>,
    scratch: Vec<Key>,
}

#[derive(Clone, Copy)]
enum Dir {
    Left,
    Right,
}

impl GreedyEngine {
    pub fn new(seq: Arc<UpdateSequence>) -> Self {
        let n = seq.universe() as usize;
        GreedyEngine {
            live: seq.initial_keys().into_iter().collect(),
            tops: MaxTree::new(n + 2),
            rows: Vec::with_capacity(seq.len() as usize),
            scratch: Vec::new(),
            seq,
        }
    }

    /// Number of rows already emitted.
    pub fn rows_done(&self) -> Time {
        self.rows.len() as Time
    }

    /// Emits the next row and returns its sorted columns, or `None` once
    /// every row has been produced.
    pub fn step(&mut self) -> Option<&[Key]> {
        let t = self.rows_done() + 1;
        if t > self.seq.len() {
            return None;
        }
        let op = self.seq.op(t);
        let x = op.key.0 as usize;
        let n = self.seq.universe() as usize;

        let mut own = vec![op.key];
        if op.kind != OpKind::Insert {
            self.walk(x, Dir::Left, 1, &mut own);
            self.walk(x, Dir::Right, n + 1, &mut own);
        }
        own.sort_unstable();

        let mut row = own;
        if op.kind.is_update() {
            let pred = self.live.range(..op.key).next_back().copied();
            let succ = self.live.range(Key(op.key.0 + 1)..).next().copied();
            if let (Some(a), Some(b)) = (pred, succ) {
                // the input point blocks the neighbour's stair unless it is
                // an insertion
                let (a, b) = (a.0 as usize, b.0 as usize);
                let (right_lim, left_lim) = match op.kind {
                    OpKind::Delete => (x, x + 1),
                    _ => (n + 1, 1),
                };
                let left = self.neighbour_union(&row, a, 1, right_lim);
                let right = self.neighbour_union(&row, b, left_lim, n + 1);
                row = if left.len() <= right.len() { left } else { right };
            }
        }

        for &k in &row {
            let deleted = k == op.key && op.kind == OpKind::Delete;
            self.tops.set(k.0 as usize, crate::model::encode_top(t, deleted));
        }
        match op.kind {
            OpKind::Insert => {
                self.live.insert(op.key);
            }
            OpKind::Delete => {
                self.live.remove(&op.key);
            }
            OpKind::Access => {}
        }
        self.rows.push(row);
        self.rows.last().map(Vec::as_slice)
    }

    /// `own ∪ stair(c)` where the stair's walks stay inside `lo..hi`.
    fn neighbour_union(&mut self, own: &[Key], c: usize, lo: usize, hi: usize) -> Vec<Key> {
        let mut cols = std::mem::take(&mut self.scratch);
        cols.clear();
        cols.push(Key(c as u32));
        self.walk(c, Dir::Left, lo, &mut cols);
        self.walk(c, Dir::Right, hi, &mut cols);
        cols.extend_from_slice(own);
        cols.sort_unstable();
        cols.dedup();
        let out = cols.clone();
        self.scratch = cols;
        out
    }

    /// Pushes the stair members of column `from` found walking in `dir`.
    /// For `Left` the walk covers `bound..from`, for `Right` it covers
    /// `from+1..bound`.
    fn walk(&self, from: usize, dir: Dir, bound: usize, out: &mut Vec<Key>) {
        let mut level = self.tops.get(from);
        let mut pos = from;
        loop {
            let hit = match dir {
                Dir::Left => self.tops.last_above(bound, pos, level),
                Dir::Right => self.tops.first_above(pos + 1, bound, level),
            };
            let Some(y) = hit else { break };
            level = self.tops.get(y);
            pos = y;
            if level % 2 == 0 {
                out.push(Key(y as u32));
            }
        }
    }

    pub fn finish(mut self) -> PointSet {
        while self.step().is_some() {}
        PointSet::from_rows(self.seq, self.rows)
    }
}
