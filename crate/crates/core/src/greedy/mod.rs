//! Online GREEDY on the grid with insertions and deletions.
//!
//! Row `t` is built from the input point `p = (x, t)`:
//! an access touches `stair(p)`, an insertion at a new extreme touches only
//! `p`, and any other update touches the smaller of
//! `stair(p) ∪ stair(pred)` and `stair(p) ∪ stair(succ)` (predecessor side on
//! ties). Stairs are measured against the finished rows below `t` plus `p`.
//!
//! [`stair`] and [`greedy_step`] work directly from the definition and are
//! quadratic; [`greedy_execute`] uses the segment-tree engine in [`engine`].

mod engine;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::model::{Key, ModelError, Op, OpKind, Point, PointSet, Time, UpdateSequence};

pub use engine::GreedyEngine;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stair {
    pub owner: Point,
    /// Owner first, then the partners below in increasing column order.
    pub members: Vec<Point>,
}

impl Stair {
    /// Columns of the stair, i.e. the cells it touches in the owner's row.
    pub fn columns(&self) -> BTreeSet<Key> {
        self.members.iter().map(|p| p.x).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GreedyRun {
    pub points: PointSet,
    pub cost: usize,
}

/// Whether `r` counts as a third point of the rectangle spanned by rows
/// `bottom..=top`.
fn blocks(r: &Point, bottom: Time, top: Time) -> bool {
    !(r.t == bottom && r.is_deletion()) && !(r.t == top && r.is_insertion())
}

fn stair_among(ps: &PointSet, owner: Point, row_t: &[Point]) -> Result<Stair, ModelError> {
    let seq = ps.sequence();
    let t = owner.t;
    let act_owner = seq
        .active_interval(owner.x, t)
        .ok_or(ModelError::InvalidPoint { x: owner.x, t })?;
    let below: Vec<Point> = (1..t)
        .flat_map(|s| ps.row(s).iter().map(move |&x| ps.classify(x, s)))
        .collect();
    let mut members = vec![owner];
    for q in &below {
        if q.x == owner.x || !act_owner.contains(q.t) {
            continue;
        }
        match seq.active_interval(q.x, q.t) {
            Some(iv) if iv.contains(t) => {}
            _ => continue,
        }
        let (lo, hi) = (q.x.min(owner.x), q.x.max(owner.x));
        let inside =
            |r: &&Point| r.x >= lo && r.x <= hi && r.t >= q.t && (r.x, r.t) != (q.x, q.t) && (r.x, r.t) != (owner.x, t);
        let empty = !below
            .iter()
            .chain(row_t.iter())
            .filter(inside)
            .any(|r| blocks(r, q.t, t));
        if empty {
            members.push(*q);
        }
    }
    members[1..].sort_by_key(|p| p.x);
    Ok(Stair { owner, members })
}

/// The stair of `(x, t)` in `ps`: the cell itself plus every point below it
/// forming an active pair with it whose rectangle holds no other qualifying
/// point. Rows above `t` are ignored; all points of row `t` act as blockers.
pub fn stair(ps: &PointSet, x: Key, t: Time) -> Result<Stair, ModelError> {
    ps.sequence().check_range(x, t)?;
    let owner = ps.classify(x, t);
    let row_t: Vec<Point> = ps.row(t).iter().map(|&y| ps.classify(y, t)).collect();
    stair_among(ps, owner, &row_t)
}

/// Touched cells of row `t` under GREEDY, computed from the definition.
///
/// Only rows below `t` and the input point of row `t` are read; any other
/// points already in row `t` are ignored.
pub fn greedy_step(ps: &PointSet, op: Op, t: Time) -> Result<Vec<Point>, ModelError> {
    let seq = ps.sequence();
    seq.check_range(op.key, t)?;
    if seq.op(t) != op {
        return Err(ModelError::Precondition(format!(
            "row {t} holds {:?}, not {op:?}",
            seq.op(t)
        )));
    }
    let p = ps.classify(op.key, t);
    let row_t = [p];
    let own = stair_among(ps, p, &row_t)?.columns();
    let cols = match op.kind {
        OpKind::Access => own,
        OpKind::Insert | OpKind::Delete => {
            let live = live_before(seq, t);
            let pred = live.range(..op.key).next_back().copied();
            let succ = live.range(Key(op.key.0 + 1)..).next().copied();
            match (pred, succ) {
                (Some(a), Some(b)) => {
                    let with = |y: Key| -> Result<BTreeSet<Key>, ModelError> {
                        let s = stair_among(ps, ps.classify(y, t), &row_t)?;
                        Ok(own.union(&s.columns()).copied().collect())
                    };
                    let (left, right) = (with(a)?, with(b)?);
                    if left.len() <= right.len() {
                        left
                    } else {
                        right
                    }
                }
                _ => own,
            }
        }
    };
    Ok(cols.into_iter().map(|x| ps.classify(x, t)).collect())
}

/// Keys present just before row `t` other than the row's own key.
fn live_before(seq: &UpdateSequence, t: Time) -> BTreeSet<Key> {
    let x = seq.op(t).key;
    seq.live_after(t - 1).into_iter().filter(|&y| y != x).collect()
}

/// Runs GREEDY over the whole sequence.
pub fn greedy_execute(seq: Arc<UpdateSequence>) -> GreedyRun {
    let mut engine = GreedyEngine::new(seq);
    while engine.step().is_some() {}
    let points = engine.finish();
    GreedyRun {
        cost: points.len(),
        points,
    }
}

/// GREEDY assembled row by row from [`greedy_step`]. Quadratic per row;
/// meant for small inputs and cross-checks.
pub fn greedy_execute_definitional(seq: Arc<UpdateSequence>) -> Result<GreedyRun, ModelError> {
    let mut ps = PointSet::from_sequence(seq.clone());
    for t in 1..=seq.len() {
        let row = greedy_step(&ps, seq.op(t), t)?;
        for p in row {
            ps = ps.with_point(p.x, p.t)?;
        }
    }
    Ok(GreedyRun {
        cost: ps.len(),
        points: ps,
    })
}
