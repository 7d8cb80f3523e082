use std::sync::Arc;

use super::{ActiveInterval, Key, ModelError, Point, Time, UpdateSequence};

/// A set of grid points attached to the update sequence it extends.
///
/// Always contains the sequence's own points `P(S)`; at most one point per
/// cell. Points are stored row by row with sorted columns, so iteration order
/// is `(t, x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    seq: Arc<UpdateSequence>,
    rows: Vec<Vec<Key>>,
    len: usize,
}

impl PointSet {
    /// The geometric view `P(S)` of a sequence.
    pub fn from_sequence(seq: Arc<UpdateSequence>) -> Self {
        let rows: Vec<Vec<Key>> = seq.ops().iter().map(|op| vec![op.key]).collect();
        let len = rows.len();
        PointSet { seq, rows, len }
    }

    /// Builds `P(S)` plus the given extra cells. Every input point of the
    /// sequence must be listed or already implied; duplicates are merged.
    pub fn new(seq: Arc<UpdateSequence>, points: impl IntoIterator<Item = (Key, Time)>) -> Result<Self, ModelError> {
        let mut rows: Vec<Vec<Key>> = vec![Vec::new(); seq.len() as usize];
        for (x, t) in points {
            seq.check_range(x, t)?;
            rows[t as usize - 1].push(x);
        }
        for (i, op) in seq.ops().iter().enumerate() {
            rows[i].push(op.key);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        let len = rows.iter().map(Vec::len).sum();
        Ok(PointSet { seq, rows, len })
    }

    /// Like [`PointSet::new`] but fails when an input point is missing from
    /// `points`. Used by parsers, where a silent repair would hide bad input.
    pub fn new_exact(
        seq: Arc<UpdateSequence>,
        points: impl IntoIterator<Item = (Key, Time)>,
    ) -> Result<Self, ModelError> {
        let points: Vec<(Key, Time)> = points.into_iter().collect();
        let ps = PointSet::new(seq, points.iter().copied())?;
        for (i, op) in ps.seq.ops().iter().enumerate() {
            let t = i as Time + 1;
            if !points.contains(&(op.key, t)) {
                return Err(ModelError::MissingInputPoint { x: op.key, t });
            }
        }
        Ok(ps)
    }

    pub(crate) fn from_rows(seq: Arc<UpdateSequence>, rows: Vec<Vec<Key>>) -> Self {
        debug_assert_eq!(rows.len(), seq.len() as usize);
        debug_assert!(rows.iter().all(|r| r.windows(2).all(|w| w[0] < w[1])));
        let len = rows.iter().map(Vec::len).sum();
        PointSet { seq, rows, len }
    }

    pub fn sequence(&self) -> &Arc<UpdateSequence> {
        &self.seq
    }

    pub fn universe(&self) -> u32 {
        self.seq.universe()
    }

    pub fn horizon(&self) -> Time {
        self.seq.len()
    }

    /// Number of points, which equals the execution cost when the set is the
    /// geometric view of an execution.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sorted columns of row `t`.
    pub fn row(&self, t: Time) -> &[Key] {
        &self.rows[t as usize - 1]
    }

    pub fn rows(&self) -> &[Vec<Key>] {
        &self.rows
    }

    pub fn contains(&self, x: Key, t: Time) -> bool {
        t >= 1 && t <= self.horizon() && self.row(t).binary_search(&x).is_ok()
    }

    pub fn point(&self, x: Key, t: Time) -> Option<Point> {
        self.contains(x, t).then(|| self.classify(x, t))
    }

    /// Builds a point at `(x, t)` classified against the source sequence,
    /// whether or not it belongs to the set.
    pub fn classify(&self, x: Key, t: Time) -> Point {
        Point {
            x,
            t,
            kind: self.seq.point_kind(x, t),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, row)| {
            let t = i as Time + 1;
            row.iter().map(move |&x| self.classify(x, t))
        })
    }

    pub fn with_point(&self, x: Key, t: Time) -> Result<PointSet, ModelError> {
        self.seq.check_range(x, t)?;
        let mut out = self.clone();
        let row = &mut out.rows[t as usize - 1];
        if let Err(pos) = row.binary_search(&x) {
            row.insert(pos, x);
            out.len += 1;
        }
        Ok(out)
    }

    pub fn without_point(&self, x: Key, t: Time) -> Result<PointSet, ModelError> {
        self.seq.check_range(x, t)?;
        if self.seq.input_kind_at(x, t).is_some() {
            return Err(ModelError::InputPointRemoval { x, t });
        }
        let mut out = self.clone();
        let row = &mut out.rows[t as usize - 1];
        match row.binary_search(&x) {
            Ok(pos) => {
                row.remove(pos);
                out.len -= 1;
                Ok(out)
            }
            Err(_) => Err(ModelError::NotInSet { x, t }),
        }
    }

    /// Checks that every point is a valid cell, naming the first offender.
    pub fn check_valid(&self) -> Result<(), ModelError> {
        match self.points().find(|p| !self.seq.is_valid(p.x, p.t)) {
            Some(p) => Err(ModelError::InvalidPoint { x: p.x, t: p.t }),
            None => Ok(()),
        }
    }

    pub fn is_valid_set(&self) -> bool {
        self.check_valid().is_ok()
    }
}

pub fn is_valid_point(ps: &PointSet, x: Key, t: Time) -> Result<bool, ModelError> {
    ps.seq.check_range(x, t)?;
    Ok(ps.seq.is_valid(x, t))
}

pub fn active_interval(ps: &PointSet, p: &Point) -> Result<ActiveInterval, ModelError> {
    ps.seq.check_range(p.x, p.t)?;
    ps.seq
        .active_interval(p.x, p.t)
        .ok_or(ModelError::InvalidPoint { x: p.x, t: p.t })
}

/// Largest column left of `p` that is valid in row `p.t`.
pub fn pred_point(ps: &PointSet, p: &Point) -> Result<Option<Point>, ModelError> {
    ps.seq.check_range(p.x, p.t)?;
    Ok((1..p.x.0)
        .rev()
        .map(Key)
        .find(|&x| ps.seq.is_valid(x, p.t))
        .map(|x| ps.classify(x, p.t)))
}

/// Smallest column right of `p` that is valid in row `p.t`.
pub fn succ_point(ps: &PointSet, p: &Point) -> Result<Option<Point>, ModelError> {
    ps.seq.check_range(p.x, p.t)?;
    Ok((p.x.0 + 1..=ps.universe())
        .map(Key)
        .find(|&x| ps.seq.is_valid(x, p.t))
        .map(|x| ps.classify(x, p.t)))
}
