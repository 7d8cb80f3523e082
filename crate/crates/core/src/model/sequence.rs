use super::{ActiveInterval, Key, ModelError, OpKind, PointKind, Time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub key: Key,
    pub kind: OpKind,
}

impl Op {
    pub fn new(key: u32, kind: OpKind) -> Self {
        Op { key: Key(key), kind }
    }

    pub fn access(key: u32) -> Self {
        Op::new(key, OpKind::Access)
    }

    pub fn insert(key: u32) -> Self {
        Op::new(key, OpKind::Insert)
    }

    pub fn delete(key: u32) -> Self {
        Op::new(key, OpKind::Delete)
    }
}

/// An ordered list of operations over the universe `[1, n]`, one per row.
///
/// Keys whose first operation is not an insertion (including keys that never
/// appear) belong to the implicit initial tree. Construction rejects any
/// operation that contradicts the key's presence at that time, which subsumes
/// the insert/delete alternation rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateSequence {
    universe: u32,
    ops: Vec<Op>,
    // Per-column update rows in CSR form: column `x` owns
    // `updates[offsets[x - 1]..offsets[x]]`.
    offsets: Vec<u32>,
    updates: Vec<(Time, OpKind)>,
    initial: Vec<bool>,
}

impl UpdateSequence {
    pub fn new(universe: u32, ops: Vec<Op>) -> Result<Self, ModelError> {
        let n = universe as usize;
        let horizon = ops.len() as Time;
        let mut first: Vec<Option<OpKind>> = vec![None; n];
        let mut counts = vec![0u32; n + 1];
        for (i, op) in ops.iter().enumerate() {
            let x = op.key.0;
            if x == 0 || x > universe {
                return Err(ModelError::OutOfRange {
                    x,
                    t: i as Time + 1,
                    universe,
                    horizon,
                });
            }
            let slot = &mut first[x as usize - 1];
            if slot.is_none() {
                *slot = Some(op.kind);
            }
            if op.kind.is_update() {
                counts[x as usize] += 1;
            }
        }
        let initial: Vec<bool> = first.iter().map(|f| *f != Some(OpKind::Insert)).collect();

        let mut present = initial.clone();
        for (i, op) in ops.iter().enumerate() {
            let idx = op.key.0 as usize - 1;
            let ok = match op.kind {
                OpKind::Access => present[idx],
                OpKind::Insert => !present[idx],
                OpKind::Delete => present[idx],
            };
            if !ok {
                return Err(ModelError::Alternation {
                    t: i as Time + 1,
                    key: op.key,
                    kind: op.kind,
                });
            }
            match op.kind {
                OpKind::Insert => present[idx] = true,
                OpKind::Delete => present[idx] = false,
                OpKind::Access => {}
            }
        }

        let mut offsets = vec![0u32; n + 1];
        for x in 1..=n {
            offsets[x] = offsets[x - 1] + counts[x];
        }
        let mut fill = offsets.clone();
        let mut updates = vec![(0, OpKind::Access); offsets[n] as usize];
        for (i, op) in ops.iter().enumerate() {
            if op.kind.is_update() {
                let x = op.key.0 as usize - 1;
                updates[fill[x] as usize] = (i as Time + 1, op.kind);
                fill[x] += 1;
            }
        }

        Ok(UpdateSequence {
            universe,
            ops,
            offsets,
            updates,
            initial,
        })
    }

    /// Builds a sequence with the smallest universe covering every key used.
    pub fn from_ops(ops: Vec<Op>) -> Result<Self, ModelError> {
        let n = ops.iter().map(|o| o.key.0).max().unwrap_or(1);
        UpdateSequence::new(n, ops)
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    /// Number of operations, which is also the number of grid rows.
    pub fn len(&self) -> Time {
        self.ops.len() as Time
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Operation at row `t` (1-based).
    pub fn op(&self, t: Time) -> Op {
        self.ops[t as usize - 1]
    }

    pub fn initially_present(&self, x: Key) -> bool {
        self.initial[x.0 as usize - 1]
    }

    /// Keys of the implicit initial tree, in increasing order.
    pub fn initial_keys(&self) -> Vec<Key> {
        (1..=self.universe)
            .filter(|&x| self.initial[x as usize - 1])
            .map(Key)
            .collect()
    }

    /// Insert and delete rows of column `x`, in time order.
    pub fn updates_of(&self, x: Key) -> &[(Time, OpKind)] {
        let i = x.0 as usize;
        &self.updates[self.offsets[i - 1] as usize..self.offsets[i] as usize]
    }

    pub fn untouched_keys(&self) -> Vec<Key> {
        let mut seen = vec![false; self.universe as usize];
        for op in &self.ops {
            seen[op.key.0 as usize - 1] = true;
        }
        (1..=self.universe)
            .filter(|&x| !seen[x as usize - 1])
            .map(Key)
            .collect()
    }

    /// Enforces that every key of the universe is accessed or updated at
    /// least once. Synthetic workloads skip this and rely on the relaxed
    /// default.
    pub fn validate_strict(&self) -> Result<(), ModelError> {
        let untouched = self.untouched_keys();
        if untouched.is_empty() {
            Ok(())
        } else {
            Err(ModelError::UntouchedKeys(untouched))
        }
    }

    pub fn check_range(&self, x: Key, t: Time) -> Result<(), ModelError> {
        if x.0 == 0 || x.0 > self.universe || t == 0 || t > self.len() {
            return Err(ModelError::OutOfRange {
                x: x.0,
                t,
                universe: self.universe,
                horizon: self.len(),
            });
        }
        Ok(())
    }

    /// Kind of the input point at `(x, t)`, if that cell belongs to `P(S)`.
    pub fn input_kind_at(&self, x: Key, t: Time) -> Option<PointKind> {
        let op = self.op(t);
        (op.key == x).then(|| op.kind.into())
    }

    pub fn point_kind(&self, x: Key, t: Time) -> PointKind {
        self.input_kind_at(x, t).unwrap_or(PointKind::Touched)
    }

    /// Whether `x` is in the tree right after row `t` (`t = 0` is the
    /// initial tree).
    pub fn present_after(&self, x: Key, t: Time) -> bool {
        let ups = self.updates_of(x);
        let idx = ups.partition_point(|&(r, _)| r <= t);
        match idx.checked_sub(1).map(|i| ups[i].1) {
            Some(OpKind::Insert) => true,
            Some(_) => false,
            None => self.initially_present(x),
        }
    }

    fn neighbours(&self, x: Key, t: Time) -> (Option<(Time, OpKind)>, Option<OpKind>, Option<(Time, OpKind)>) {
        let ups = self.updates_of(x);
        let idx = ups.partition_point(|&(r, _)| r < t);
        let here = ups.get(idx).filter(|&&(r, _)| r == t).map(|&(_, k)| k);
        let below = idx.checked_sub(1).map(|i| ups[i]);
        let above = ups.get(idx + usize::from(here.is_some())).copied();
        (below, here, above)
    }

    /// Validity of the cell `(x, t)` under the three-case rule on the nearest
    /// update points of the column. Coordinates must be in range.
    pub fn is_valid(&self, x: Key, t: Time) -> bool {
        let (below, here, above) = self.neighbours(x, t);
        let below = below.map(|(_, k)| k);
        let above = above.map(|(_, k)| k);
        let is = |v: Option<OpKind>, k: OpKind| v.is_none_or(|v| v == k);
        match here {
            None => is(below, OpKind::Insert) && is(above, OpKind::Delete),
            Some(OpKind::Insert) => is(below, OpKind::Delete) && is(above, OpKind::Delete),
            Some(_) => is(below, OpKind::Insert) && is(above, OpKind::Insert),
        }
    }

    /// Active interval of a valid cell, `None` for invalid cells.
    ///
    /// An insertion point always opens its interval and a deletion point
    /// always closes it, so a delete immediately followed by a re-insert of
    /// the same key yields two separate intervals.
    pub fn active_interval(&self, x: Key, t: Time) -> Option<ActiveInterval> {
        if !self.is_valid(x, t) {
            return None;
        }
        let (below, here, above) = self.neighbours(x, t);
        let iv = match here {
            Some(OpKind::Insert) => ActiveInterval {
                start: Some(t),
                end: above.map(|(r, _)| r),
            },
            Some(_) => ActiveInterval {
                start: below.map(|(r, _)| r),
                end: Some(t),
            },
            None => ActiveInterval {
                start: below.map(|(r, _)| r),
                end: above.map(|(r, _)| r),
            },
        };
        Some(iv)
    }

    /// Keys present in the tree after row `t`, in increasing order.
    pub fn live_after(&self, t: Time) -> Vec<Key> {
        (1..=self.universe)
            .map(Key)
            .filter(|&x| self.present_after(x, t))
            .collect()
    }
}
