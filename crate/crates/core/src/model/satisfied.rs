//! Arboreal satisfaction.
//!
//! Condition one is decided by a single upward sweep. For every column the
//! sweep keeps the row of its highest point seen so far, encoded as
//! `2t` (or `2t - 1` when that point is a deletion, which does not count on
//! the bottom row of a rectangle). A point `a` in row `t` forms an
//! unsatisfied rectangle with the top point `q = (y, s)` of column `y` exactly
//! when `2s` exceeds the encoded tops of column `a.x` and of every column
//! strictly between, and no countable row-`t` point lies between them. Those
//! columns are the prefix maxima met when walking away from `a`, which the
//! segment tree finds one at a time.

use std::collections::BTreeSet;

use super::{Key, ModelError, OpKind, Point, PointKind, PointSet, Time};
use crate::segtree::{MaxTree, EMPTY};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    /// An active pair whose closed rectangle holds no qualifying third point.
    EmptyRectangle { lower: Point, upper: Point },
    /// An update point with both neighbours valid but neither touched.
    UnservedUpdate { point: Point },
}

pub(crate) fn encode_top(t: Time, deletion: bool) -> i64 {
    2 * t as i64 - i64::from(deletion)
}

pub fn is_satisfied(ps: &PointSet) -> Result<bool, ModelError> {
    Ok(check_satisfied(ps)?.is_none())
}

/// Returns the first violation, or `None` when the set is satisfied.
///
/// Rectangle violations are reported before update violations; among
/// rectangle violations the smallest `(lower.t, lower.x, upper.t, upper.x)`
/// wins, among update violations the earliest row.
pub fn check_satisfied(ps: &PointSet) -> Result<Option<Violation>, ModelError> {
    check_satisfied_upto(ps, ps.horizon())
}

/// Same as [`check_satisfied`] restricted to pairs and update points in rows
/// `1..=upto`.
pub fn check_satisfied_upto(ps: &PointSet, upto: Time) -> Result<Option<Violation>, ModelError> {
    ps.check_valid()?;
    let upto = upto.min(ps.horizon());
    let rect = rectangle_violations(ps, upto)
        .into_iter()
        .min_by_key(|(lo, hi)| (lo.t, lo.x, hi.t, hi.x));
    if let Some((lower, upper)) = rect {
        return Ok(Some(Violation::EmptyRectangle { lower, upper }));
    }
    Ok(first_unserved_update(ps, upto).map(|point| Violation::UnservedUpdate { point }))
}

fn rectangle_violations(ps: &PointSet, upto: Time) -> Vec<(Point, Point)> {
    let seq = ps.sequence();
    let n = ps.universe() as usize;
    let mut tops = MaxTree::new(n + 2);
    let mut found = Vec::new();
    for t in 1..=upto {
        let row = ps.row(t);
        let op = seq.op(t);
        let counts = |x: Key| !(x == op.key && op.kind == OpKind::Insert);
        for (i, &ax) in row.iter().enumerate() {
            if !counts(ax) {
                continue;
            }
            let a = ps.classify(ax, t);
            let start = tops.get(ax.0 as usize);

            let right_limit = row[i + 1..]
                .iter()
                .find(|&&x| counts(x))
                .map_or(n + 1, |x| x.0 as usize);
            let mut level = start;
            let mut pos = ax.0 as usize;
            while let Some(y) = tops.first_above(pos + 1, right_limit, level) {
                level = tops.get(y);
                pos = y;
                if level % 2 == 0 {
                    found.push((ps.classify(Key(y as u32), (level / 2) as Time), a));
                }
            }

            let left_limit = row[..i]
                .iter()
                .rev()
                .find(|&&x| counts(x))
                .map_or(1, |x| x.0 as usize + 1);
            let mut level = start;
            let mut pos = ax.0 as usize;
            while let Some(y) = tops.last_above(left_limit, pos, level) {
                level = tops.get(y);
                pos = y;
                if level % 2 == 0 {
                    found.push((ps.classify(Key(y as u32), (level / 2) as Time), a));
                }
            }
        }
        for &x in row {
            let del = x == op.key && op.kind == OpKind::Delete;
            tops.set(x.0 as usize, encode_top(t, del));
        }
    }
    debug_assert!(tops.get(0) == EMPTY);
    found
}

fn first_unserved_update(ps: &PointSet, upto: Time) -> Option<Point> {
    let seq = ps.sequence();
    let mut live: BTreeSet<Key> = seq.initial_keys().into_iter().collect();
    for t in 1..=upto {
        let op = seq.op(t);
        let x = op.key;
        if op.kind.is_update() {
            let pred = live.range(..x).next_back().copied();
            let succ = live.range(Key(x.0 + 1)..).next().copied();
            if let (Some(p), Some(s)) = (pred, succ) {
                if !ps.contains(p, t) && !ps.contains(s, t) {
                    return Some(ps.classify(x, t));
                }
            }
        }
        match op.kind {
            OpKind::Insert => {
                live.insert(x);
            }
            OpKind::Delete => {
                live.remove(&x);
            }
            OpKind::Access => {}
        }
    }
    None
}

/// For a satisfied set and an active pair `p`, `q` with `p.t < q.t` that is
/// not axis-aligned, returns one point on a side of the rectangle incident to
/// `p` that is a non-deletion point or the corner `(p.x, q.t)`, and one point
/// on a side incident to `q` that is a non-insertion point or the corner
/// `(q.x, p.t)`.
pub fn side_fact_witness(ps: &PointSet, p: &Point, q: &Point) -> Result<(Point, Point), ModelError> {
    if !is_satisfied(ps)? {
        return Err(ModelError::Precondition("point set is not satisfied".into()));
    }
    let (p, q) = (ps.classify(p.x, p.t), ps.classify(q.x, q.t));
    if !ps.contains(p.x, p.t) || !ps.contains(q.x, q.t) {
        return Err(ModelError::Precondition("pair not in the point set".into()));
    }
    if p.t >= q.t || p.x == q.x {
        return Err(ModelError::Precondition(
            "pair must satisfy p.t < q.t and lie in different columns".into(),
        ));
    }
    let seq = ps.sequence();
    let act_p = seq.active_interval(p.x, p.t).expect("valid set");
    let act_q = seq.active_interval(q.x, q.t).expect("valid set");
    if !(act_p.contains(q.t) && act_q.contains(p.t)) {
        return Err(ModelError::Precondition("not an active pair".into()));
    }

    let step: i64 = if q.x > p.x { 1 } else { -1 };
    let col = |from: Key, k: i64| Key((from.0 as i64 + step * k) as u32);
    let width = (q.x.0 as i64 - p.x.0 as i64).abs();
    let other = |x: Key, t: Time| -> Option<Point> {
        ((x, t) != (p.x, p.t) && (x, t) != (q.x, q.t))
            .then(|| ps.point(x, t))
            .flatten()
    };

    let p_corner = (p.x, q.t);
    let p_side = (1..=width)
        .map(|k| (col(p.x, k), p.t))
        .chain((p.t + 1..=q.t).map(|t| (p.x, t)))
        .filter_map(|(x, t)| other(x, t))
        .find(|r| r.kind != PointKind::Delete || (r.x, r.t) == p_corner);

    let q_corner = (q.x, p.t);
    let q_side = (1..=width)
        .map(|k| (col(q.x, -k), q.t))
        .chain((p.t..q.t).rev().map(|t| (q.x, t)))
        .filter_map(|(x, t)| other(x, t))
        .find(|r| r.kind != PointKind::Insert || (r.x, r.t) == q_corner);

    match (p_side, q_side) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(ModelError::FactViolation(format!("no side witness for pair {p} / {q}"))),
    }
}
