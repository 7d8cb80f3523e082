use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use super::{apply_reconfiguration, delete_via_neighbor, insert_via_neighbor, ArborealError, BSTree, Reconfiguration};
use crate::model::{is_satisfied, Key, Op, OpKind, PointSet, Time, UpdateSequence};

/// An initial tree and one reconfiguration per operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub universe: u32,
    pub initial: BSTree,
    pub steps: Vec<Reconfiguration>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub final_tree: BSTree,
    /// Sum of `max(|tau|, |tau'|)`.
    pub cost: usize,
    /// Sum of `|tau ∪ tau'|`.
    pub touched: usize,
}

impl Execution {
    pub fn sequence(&self) -> Result<UpdateSequence, ArborealError> {
        let ops = self
            .steps
            .iter()
            .map(|s| Op {
                key: s.key,
                kind: s.kind,
            })
            .collect();
        Ok(UpdateSequence::new(self.universe, ops)?)
    }

    /// Runs every step from the initial tree, checking each one.
    pub fn replay(&self) -> Result<Replay, ArborealError> {
        self.initial.check()?;
        let mut tree = self.initial.clone();
        let (mut cost, mut touched) = (0, 0);
        for (i, r) in self.steps.iter().enumerate() {
            let c = apply_reconfiguration(&mut tree, r).map_err(|e| ArborealError::Step {
                t: i as Time + 1,
                source: Box::new(e),
            })?;
            cost += c.cost;
            touched += c.touched;
        }
        Ok(Replay {
            final_tree: tree,
            cost,
            touched,
        })
    }

    /// ```text
    /// n m
    /// init <tree>
    /// t K key ; touched keys ; <tree>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {}\ninit {}\n",
            self.universe,
            self.steps.len(),
            self.initial.to_text()
        );
        for (i, s) in self.steps.iter().enumerate() {
            let tau: Vec<String> = s.tau.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(
                out,
                "{} {} {} ; {} ; {}",
                i + 1,
                s.kind.letter(),
                s.key,
                tau.join(" "),
                s.tau_prime.to_text()
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ArborealError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: String| ArborealError::Parse { line, msg };
        let num = |line: usize, s: &str| -> Result<u32, ArborealError> {
            s.parse::<u32>().map_err(|_| perr(line, format!("bad number `{s}`")))
        };
        let (line, header) = lines.next().ok_or_else(|| perr(0, "missing header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let [n, m] = head[..] else {
            return Err(perr(line, "expected `n m`".into()));
        };
        let (universe, m) = (num(line, n)?, num(line, m)?);
        let (line, init) = lines.next().ok_or_else(|| perr(line, "missing `init` line".into()))?;
        let shape = init
            .strip_prefix("init")
            .ok_or_else(|| perr(line, "expected `init <tree>`".into()))?;
        let initial = BSTree::parse(shape).map_err(|e| perr(line, e.to_string()))?;

        let mut steps = Vec::with_capacity(m as usize);
        for (line, l) in lines {
            let parts: Vec<&str> = l.split(';').collect();
            let [op, tau, shape] = parts[..] else {
                return Err(perr(line, "expected `t K key ; keys ; tree`".into()));
            };
            let op: Vec<&str> = op.split_whitespace().collect();
            let [t, kind, key] = op[..] else {
                return Err(perr(line, "expected `t K key`".into()));
            };
            if num(line, t)? as usize != steps.len() + 1 {
                return Err(perr(line, format!("expected step {}", steps.len() + 1)));
            }
            let kind = match kind {
                "A" => OpKind::Access,
                "I" => OpKind::Insert,
                "D" => OpKind::Delete,
                k => return Err(perr(line, format!("unknown kind `{k}`"))),
            };
            let tau = tau
                .split_whitespace()
                .map(|s| num(line, s).map(Key))
                .collect::<Result<BTreeSet<Key>, _>>()?;
            steps.push(Reconfiguration {
                tau,
                tau_prime: BSTree::parse(shape).map_err(|e| perr(line, e.to_string()))?,
                key: Key(num(line, key)?),
                kind,
            });
        }
        if steps.len() != m as usize {
            return Err(perr(0, format!("header says {m} steps, found {}", steps.len())));
        }
        Ok(Execution {
            universe,
            initial,
            steps,
        })
    }
}

/// The point set of an execution: row `t` holds `tau ∪ tau'` of step `t`.
/// The initial tree must hold exactly the keys the sequence starts with.
pub fn tree_to_geometry(e: &Execution) -> Result<PointSet, ArborealError> {
    let seq = Arc::new(e.sequence()?);
    if !e.initial.keys().eq(seq.initial_keys()) {
        return Err(ArborealError::Precondition(
            "the initial tree must hold every key that is not first inserted".into(),
        ));
    }
    e.replay()?;
    let cells = e
        .steps
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.touched_keys().into_iter().map(move |k| (k, i as Time + 1)));
    Ok(PointSet::new_exact(seq, cells.collect::<Vec<_>>())?)
}

/// First row at or after `t` with a point in column `x`; `None` when there is
/// none.
pub fn next_touch_time(ps: &PointSet, x: Key, t: Time) -> Option<Time> {
    (t.max(1)..=ps.horizon()).find(|&s| ps.contains(x, s))
}

/// Touch times of every column, for repeated next-touch queries.
struct Touches(Vec<Vec<Time>>);

impl Touches {
    fn new(ps: &PointSet) -> Self {
        let mut cols = vec![Vec::new(); ps.universe() as usize + 1];
        for p in ps.points() {
            cols[p.x.0 as usize].push(p.t);
        }
        Touches(cols)
    }

    /// Next touch at or after `t`, with "never" ordered last.
    fn next(&self, x: Key, t: Time) -> Time {
        let col = &self.0[x.0 as usize];
        col.get(col.partition_point(|&s| s < t)).copied().unwrap_or(Time::MAX)
    }
}

/// Builds an execution whose touched sets are exactly the rows of a satisfied
/// point set. The tree before row `t` is a treap on `(next touch, key)`; each
/// row's keys are rearranged into a treap on the touch after it.
pub fn geometry_to_tree_offline(ps: &PointSet) -> Result<Execution, ArborealError> {
    ps.check_valid()?;
    if !is_satisfied(ps)? {
        return Err(ArborealError::Precondition("the point set is not satisfied".into()));
    }
    let seq = ps.sequence().clone();
    let touches = Touches::new(ps);
    let initial = BSTree::treap(seq.initial_keys(), |k| touches.next(k, 1));
    let mut tree = initial.clone();
    let mut steps = Vec::with_capacity(ps.horizon() as usize);
    for t in 1..=ps.horizon() {
        let op = seq.op(t);
        let y = op.key;
        let row = ps.row(t);
        let tau: BTreeSet<Key> = row.iter().copied().filter(|&k| tree.contains(k)).collect();
        let next = |k: Key| touches.next(k, t + 1);
        let target = BSTree::treap(
            row.iter().copied().filter(|&k| !(op.kind == OpKind::Delete && k == y)),
            next,
        );
        let r = match op.kind {
            OpKind::Access => Reconfiguration {
                tau,
                tau_prime: target,
                key: y,
                kind: OpKind::Access,
            },
            OpKind::Insert => insert_via_neighbor(&tree, tau, y, Some(target))?.reconfiguration,
            OpKind::Delete => delete_via_neighbor(&tree, tau, y, Some(target))?.reconfiguration,
        };
        let wrap = |e| ArborealError::Step { t, source: Box::new(e) };
        apply_reconfiguration(&mut tree, &r).map_err(wrap)?;
        for k in r.tau_prime.keys() {
            for c in [tree.left(k), tree.right(k)].into_iter().flatten() {
                if next(k) > next(c) {
                    return Err(ArborealError::Invariant {
                        t,
                        msg: format!("{k} is touched later than its child {c}"),
                    });
                }
            }
        }
        steps.push(r);
    }
    Ok(Execution {
        universe: seq.universe(),
        initial,
        steps,
    })
}

/// Reads the points of an access sequence over a permutation of `[1, n]` as
/// the points of the sequence inserting the keys in the same order.
pub fn access_to_insertion(ps: &PointSet) -> Result<PointSet, ArborealError> {
    let seq = ps.sequence();
    let n = seq.universe();
    let mut seen = vec![false; n as usize + 1];
    for op in seq.ops() {
        if op.kind != OpKind::Access || std::mem::replace(&mut seen[op.key.0 as usize], true) {
            return Err(ArborealError::Precondition(
                "expected each key accessed exactly once".into(),
            ));
        }
    }
    if seq.len() != n {
        return Err(ArborealError::Precondition(
            "expected a permutation of the universe".into(),
        ));
    }
    let inserts = UpdateSequence::new(n, seq.ops().iter().map(|op| Op::insert(op.key.0)).collect())?;
    let out = PointSet::new_exact(Arc::new(inserts), ps.points().map(|p| (p.x, p.t)).collect::<Vec<_>>())?;
    out.check_valid()?;
    Ok(out)
}

/// Turns a satisfied point set into a tree execution and reads the final tree
/// in order.
pub fn sort_via_bst(ps: &PointSet) -> Result<Vec<Key>, ArborealError> {
    let e = geometry_to_tree_offline(ps)?;
    Ok(e.replay()?.final_tree.in_order())
}
