use std::collections::{BTreeSet, HashMap, VecDeque};
use std::ops::Bound;

use super::{ArborealError, BSTree, ChildSide, Links};
use crate::model::{Key, OpKind};

/// One step of an execution: the touched set before, the subtree after.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconfiguration {
    pub tau: BTreeSet<Key>,
    pub tau_prime: BSTree,
    pub key: Key,
    pub kind: OpKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ReconfigCost {
    /// `max(|tau|, |tau'|)`
    pub cost: usize,
    /// `|tau ∪ tau'|`, the number of points the step adds to the geometry.
    pub touched: usize,
}

impl Reconfiguration {
    pub fn cost(&self) -> ReconfigCost {
        let touched = self.tau.len() + self.tau_prime.keys().filter(|k| !self.tau.contains(k)).count();
        ReconfigCost {
            cost: self.tau.len().max(self.tau_prime.len()),
            touched,
        }
    }

    /// Keys the step touches, `tau ∪ tau'`, in increasing order.
    pub fn touched_keys(&self) -> Vec<Key> {
        let mut all: BTreeSet<Key> = self.tau.clone();
        all.extend(self.tau_prime.keys());
        all.into_iter().collect()
    }
}

/// Pendant roots keyed by the null slot of `tau'` they go into. Slot `i` sits
/// between the `i`-th and `(i+1)`-th key of `tau'`.
struct Plan {
    slots: HashMap<usize, Key>,
}

fn check(tree: &BSTree, r: &Reconfiguration) -> Result<Plan, ArborealError> {
    if let Some(&k) = r.tau.iter().find(|&&k| !tree.contains(k)) {
        return Err(ArborealError::NotInTree(k));
    }
    if r.tau.is_empty() {
        if r.kind != OpKind::Insert && !tree.is_empty() {
            return Err(ArborealError::RootNotInTau { root: tree.root() });
        }
    } else {
        let root = tree.root().filter(|k| r.tau.contains(k));
        if root.is_none() {
            return Err(ArborealError::RootNotInTau { root: tree.root() });
        }
        for &k in &r.tau {
            if Some(k) != root && !tree.parent(k).is_some_and(|p| r.tau.contains(&p)) {
                return Err(ArborealError::Disconnected(k));
            }
        }
    }

    let mismatch = || ArborealError::SetRelationMismatch {
        kind: r.kind,
        key: r.key,
    };
    let mut expected = r.tau.clone();
    match r.kind {
        OpKind::Access => {
            if !r.tau.contains(&r.key) {
                return Err(mismatch());
            }
        }
        OpKind::Insert => {
            if tree.contains(r.key) {
                return Err(mismatch());
            }
            expected.insert(r.key);
        }
        OpKind::Delete => {
            if !expected.remove(&r.key) {
                return Err(mismatch());
            }
        }
    }
    if !r.tau_prime.keys().eq(expected.iter().copied()) {
        return Err(mismatch());
    }
    r.tau_prime.check()?;

    let new_keys: Vec<Key> = r.tau_prime.keys().collect();
    let slot_of = |x: Key| new_keys.partition_point(|&k| k < x);
    let mut slots = HashMap::new();
    for p in pendants(tree, &r.tau) {
        let lo = r.tau.range(..p).next_back().copied();
        let hi = r.tau.range(p..).next().copied();
        let lo_bound = lo.map_or(Bound::Unbounded, Bound::Excluded);
        let hi_bound = hi.map_or(Bound::Unbounded, Bound::Excluded);
        let mut range = tree.nodes.range((lo_bound, hi_bound));
        let first = range.next().map(|(&k, _)| k).unwrap_or(p);
        let last = range.next_back().map(|(&k, _)| k).unwrap_or(first);
        let s = slot_of(first);
        if slot_of(last) != s || slots.insert(s, p).is_some() {
            return Err(ArborealError::PendantLinkFailure { pendant: p });
        }
    }
    Ok(Plan { slots })
}

/// Untouched children of touched nodes, or the whole tree when nothing is
/// touched.
fn pendants(tree: &BSTree, tau: &BTreeSet<Key>) -> Vec<Key> {
    if tau.is_empty() {
        return tree.root().into_iter().collect();
    }
    tau.iter()
        .flat_map(|&k| [tree.left(k), tree.right(k)])
        .flatten()
        .filter(|c| !tau.contains(c))
        .collect()
}

/// Checks `r` against `tree` and performs it in place.
pub fn apply_reconfiguration(tree: &mut BSTree, r: &Reconfiguration) -> Result<ReconfigCost, ArborealError> {
    let plan = check(tree, r)?;
    for k in &r.tau {
        tree.nodes.remove(k);
    }
    let new_keys: Vec<Key> = r.tau_prime.keys().collect();
    for (i, &k) in new_keys.iter().enumerate() {
        let shape = r.tau_prime.links(k).expect("key of tau'");
        let left = shape.left.or_else(|| plan.slots.get(&i).copied());
        let right = shape.right.or_else(|| plan.slots.get(&(i + 1)).copied());
        for c in [left, right].into_iter().flatten() {
            if let Some(l) = tree.nodes.get_mut(&c) {
                l.parent = Some(k);
            }
        }
        tree.nodes.insert(
            k,
            Links {
                left,
                right,
                parent: shape.parent,
            },
        );
    }
    tree.root = match r.tau_prime.root() {
        Some(k) => Some(k),
        None => {
            let p = plan.slots.get(&0).copied();
            if let Some(l) = p.and_then(|p| tree.nodes.get_mut(&p)) {
                l.parent = None;
            }
            p
        }
    };
    Ok(r.cost())
}

/// Checks `r` against `tree` and returns the resulting tree and the step's
/// cost.
pub fn validate_reconfiguration(tree: &BSTree, r: &Reconfiguration) -> Result<(BSTree, ReconfigCost), ArborealError> {
    let mut next = tree.clone();
    let cost = apply_reconfiguration(&mut next, r)?;
    Ok((next, cost))
}

/// Which touched neighbour an update is routed through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Pred(Key),
    Succ(Key),
    /// The updated key is the smallest or the largest.
    Extreme,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Root,
    Child(Key, ChildSide),
}

/// `slot ← new`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointerChange {
    pub slot: Slot,
    pub new: Option<Key>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighbourUpdate {
    pub reconfiguration: Reconfiguration,
    pub route: Route,
    /// Pointer changes that splice the key in or out once the touched part
    /// has been rotated into position.
    pub changes: Vec<PointerChange>,
}

fn route(tree: &BSTree, tau: &BTreeSet<Key>, y: Key) -> Result<Route, ArborealError> {
    let (x, z) = (tree.pred(y), tree.succ(y));
    if let Some(x) = x.filter(|x| tau.contains(x)) {
        return Ok(Route::Pred(x));
    }
    if let Some(z) = z.filter(|z| tau.contains(z)) {
        return Ok(Route::Succ(z));
    }
    if x.is_none() || z.is_none() {
        return Ok(Route::Extreme);
    }
    Err(ArborealError::NeighbourMissing(y))
}

/// Depth of every touched node below the root, by a walk inside `tau`.
/// Unreachable nodes get a depth past all others.
fn depths(tree: &BSTree, tau: &BTreeSet<Key>) -> HashMap<Key, i64> {
    let mut d = HashMap::new();
    let mut queue: VecDeque<(Key, i64)> = tree
        .root()
        .filter(|r| tau.contains(r))
        .map(|r| (r, 0))
        .into_iter()
        .collect();
    while let Some((k, dk)) = queue.pop_front() {
        d.insert(k, dk);
        for c in [tree.left(k), tree.right(k)].into_iter().flatten() {
            if tau.contains(&c) {
                queue.push_back((c, dk + 1));
            }
        }
    }
    let far = tau.len() as i64 + 1;
    for &k in tau {
        d.entry(k).or_insert(far);
    }
    d
}

fn check_subset(tree: &BSTree, tau: &BTreeSet<Key>) -> Result<(), ArborealError> {
    match tau.iter().find(|&&k| !tree.contains(k)) {
        Some(&k) => Err(ArborealError::NotInTree(k)),
        None => Ok(()),
    }
}

fn finish(
    tree: &BSTree,
    tau: BTreeSet<Key>,
    tau_prime: BSTree,
    key: Key,
    kind: OpKind,
    route: Route,
    changes: Vec<PointerChange>,
) -> Result<NeighbourUpdate, ArborealError> {
    let reconfiguration = Reconfiguration {
        tau,
        tau_prime,
        key,
        kind,
    };
    check(tree, &reconfiguration)?;
    Ok(NeighbourUpdate {
        reconfiguration,
        route,
        changes,
    })
}

/// Inserts `y` through a touched neighbour. Without a `target`, the new
/// subtree is the touched part with `y` hung below the neighbour.
pub fn insert_via_neighbor(
    tree: &BSTree,
    tau: BTreeSet<Key>,
    y: Key,
    target: Option<BSTree>,
) -> Result<NeighbourUpdate, ArborealError> {
    check_subset(tree, &tau)?;
    if tree.contains(y) {
        return Err(ArborealError::SetRelationMismatch {
            kind: OpKind::Insert,
            key: y,
        });
    }
    if let (Some(x), Some(z)) = (tree.pred(y), tree.succ(y)) {
        if !tree.is_ancestor(x, z) && !tree.is_ancestor(z, x) {
            return Err(ArborealError::InvalidShape(format!(
                "consecutive keys {x} and {z} are not on one root path"
            )));
        }
    }
    let route = route(tree, &tau, y)?;
    let depth = depths(tree, &tau);
    let (changes, y_prio) = match route {
        Route::Pred(x) => (
            vec![
                PointerChange {
                    slot: Slot::Child(y, ChildSide::Right),
                    new: tree.right(x),
                },
                PointerChange {
                    slot: Slot::Child(x, ChildSide::Right),
                    new: Some(y),
                },
            ],
            2 * depth[&x] + 1,
        ),
        Route::Succ(z) => (
            vec![
                PointerChange {
                    slot: Slot::Child(y, ChildSide::Left),
                    new: tree.left(z),
                },
                PointerChange {
                    slot: Slot::Child(z, ChildSide::Left),
                    new: Some(y),
                },
            ],
            2 * depth[&z] + 1,
        ),
        Route::Extreme => {
            let mut changes = vec![PointerChange {
                slot: Slot::Root,
                new: Some(y),
            }];
            if let Some(r) = tree.root() {
                let side = if tree.max() < Some(y) {
                    ChildSide::Left
                } else {
                    ChildSide::Right
                };
                changes.push(PointerChange {
                    slot: Slot::Child(y, side),
                    new: Some(r),
                });
            }
            (changes, -1)
        }
    };
    let tau_prime = target.unwrap_or_else(|| {
        let keys = tau.iter().copied().chain(std::iter::once(y));
        BSTree::treap(keys, |k| if k == y { y_prio } else { 2 * depth[&k] })
    });
    finish(tree, tau, tau_prime, y, OpKind::Insert, route, changes)
}

/// Deletes `y` through a touched neighbour. Without a `target`, the new
/// subtree is the touched part rotated so that the neighbour is on top and
/// `y` hangs right below it, with `y` then spliced out.
pub fn delete_via_neighbor(
    tree: &BSTree,
    tau: BTreeSet<Key>,
    y: Key,
    target: Option<BSTree>,
) -> Result<NeighbourUpdate, ArborealError> {
    check_subset(tree, &tau)?;
    if !tau.contains(&y) {
        return Err(ArborealError::SetRelationMismatch {
            kind: OpKind::Delete,
            key: y,
        });
    }
    let route = route(tree, &tau, y)?;
    let depth = depths(tree, &tau);
    let rest = |k: Key| tau.iter().copied().filter(move |&j| j != k);
    let (changes, tau_prime) = match route {
        Route::Pred(x) | Route::Succ(x) => {
            let (side, other) = match route {
                Route::Pred(_) => (ChildSide::Right, ChildSide::Right),
                _ => (ChildSide::Left, ChildSide::Left),
            };
            let prio = |k: Key| match k {
                k if k == x => 0,
                k if k == y => 1,
                k => 2 + depth[&k],
            };
            // after the rotation, y is the `side` child of x and its other
            // child slot is empty
            let rotated = BSTree::treap(tau.iter().copied(), prio);
            let moved_up = rotated.child(y, other).or_else(|| {
                let (lo, hi) = match side {
                    ChildSide::Right => (Some(y), tau.range(Key(y.0 + 1)..).next().copied()),
                    ChildSide::Left => (tau.range(..y).next_back().copied(), Some(y)),
                };
                pendants(tree, &tau)
                    .into_iter()
                    .find(|&p| lo.is_none_or(|lo| p > lo) && hi.is_none_or(|hi| p < hi))
            });
            let changes = vec![PointerChange {
                slot: Slot::Child(x, side),
                new: moved_up,
            }];
            (changes, target.unwrap_or_else(|| BSTree::treap(rest(y), prio)))
        }
        Route::Extreme => {
            let is_max = tree.succ(y).is_none();
            let inner = if is_max { tree.left(y) } else { tree.right(y) };
            let slot = match tree.parent(y) {
                Some(p) => Slot::Child(p, if is_max { ChildSide::Right } else { ChildSide::Left }),
                None => Slot::Root,
            };
            let changes = vec![PointerChange { slot, new: inner }];
            (changes, target.unwrap_or_else(|| BSTree::treap(rest(y), |k| depth[&k])))
        }
    };
    finish(tree, tau, tau_prime, y, OpKind::Delete, route, changes)
}
