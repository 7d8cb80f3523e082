//! A catalogue of malformed reconfigurations.

use std::collections::BTreeSet;

use geobst::arboreal::{validate_reconfiguration, ArborealError, BSTree, Reconfiguration};
use geobst::model::{Key, OpKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct InvalidCase {
    pub name: &'static str,
    pub tree: BSTree,
    pub step: Reconfiguration,
    pub expect: fn(&ArborealError) -> bool,
}

fn t(s: &str) -> BSTree {
    BSTree::parse(s).unwrap()
}

fn set(keys: &[u32]) -> BTreeSet<Key> {
    keys.iter().map(|&k| Key(k)).collect()
}

fn step(tau: &[u32], shape: &str, key: u32, kind: OpKind) -> Reconfiguration {
    Reconfiguration {
        tau: set(tau),
        tau_prime: t(shape),
        key: Key(key),
        kind,
    }
}

/// Malformed steps, each with the rejection it must produce.
pub fn invalid_cases() -> Vec<InvalidCase> {
    use ArborealError as E;
    use OpKind::*;
    let odd = "(((. 1 .) 2 (. 3 .)) 4 ((. 5 .) 6 (. 7 .)))";
    let even = "(((. 2 .) 4 (. 6 .)) 8 ((. 10 .) 12 (. 14 .)))";
    let case = |name, tree: &str, step, expect| InvalidCase {
        name,
        tree: t(tree),
        step,
        expect,
    };
    vec![
        case(
            "touched key absent",
            odd,
            step(&[4, 2, 3, 9], "((. 2 (. 3 .)) 4 (. 9 .))", 3, Access),
            |e| *e == E::NotInTree(Key(9)),
        ),
        case("root untouched", odd, step(&[6, 5], "((. 5 .) 6 .)", 5, Access), |e| {
            matches!(e, E::RootNotInTau { root: Some(Key(4)) })
        }),
        case(
            "gap on the root path",
            odd,
            step(&[4, 3], "((. 3 .) 4 .)", 3, Access),
            |e| *e == E::Disconnected(Key(3)),
        ),
        case(
            "deep gap",
            even,
            step(&[8, 4, 6, 14], "(((. 4 (. 6 .)) 8 .) 14 .)", 6, Access),
            |e| *e == E::Disconnected(Key(14)),
        ),
        case(
            "access drops a key",
            odd,
            step(&[4, 2, 3], "((. 2 .) 3 .)", 3, Access),
            |e| matches!(e, E::SetRelationMismatch { .. }),
        ),
        case(
            "access key untouched",
            odd,
            step(&[4, 2], "((. 2 .) 4 .)", 3, Access),
            |e| matches!(e, E::SetRelationMismatch { .. }),
        ),
        case(
            "access adds a key",
            odd,
            step(&[4, 2, 3], "((. 2 (. 3 .)) 4 (. 5 .))", 3, Access),
            |e| matches!(e, E::SetRelationMismatch { .. }),
        ),
        case("insert of a present key", odd, step(&[4], "(. 4 .)", 4, Insert), |e| {
            matches!(e, E::SetRelationMismatch { kind: Insert, .. })
        }),
        case(
            "insert leaves key out",
            even,
            step(&[8, 12], "(. 8 (. 12 .))", 13, Insert),
            |e| matches!(e, E::SetRelationMismatch { kind: Insert, .. }),
        ),
        case(
            "insert drops a touched key",
            even,
            step(&[8, 12], "(. 8 (. 9 .))", 9, Insert),
            |e| matches!(e, E::SetRelationMismatch { kind: Insert, .. }),
        ),
        case(
            "delete keeps the key",
            odd,
            step(&[4, 2, 3], "((. 2 (. 3 .)) 4 .)", 3, Delete),
            |e| matches!(e, E::SetRelationMismatch { kind: Delete, .. }),
        ),
        case(
            "delete key untouched",
            odd,
            step(&[4, 2], "((. 2 .) 4 .)", 3, Delete),
            |e| matches!(e, E::SetRelationMismatch { kind: Delete, .. }),
        ),
        case(
            "delete of an absent key",
            even,
            step(&[8, 4, 5], "((. 4 .) 8 .)", 5, Delete),
            |e| *e == E::NotInTree(Key(5)),
        ),
        case("delete from the empty tree", ".", step(&[], ".", 1, Delete), |e| {
            matches!(e, E::SetRelationMismatch { kind: Delete, .. })
        }),
        case("access with nothing touched", odd, step(&[], ".", 4, Access), |e| {
            matches!(e, E::RootNotInTau { .. })
        }),
        case("delete with nothing touched", odd, step(&[], ".", 1, Delete), |e| {
            matches!(e, E::RootNotInTau { .. })
        }),
        case(
            "insert below an untouched root",
            even,
            step(&[2], "((. 1 .) 2 .)", 1, Insert),
            |e| matches!(e, E::RootNotInTau { .. }),
        ),
        case(
            "extreme delete below an untouched root",
            even,
            step(&[2, 4], "(. 4 .)", 2, Delete),
            |e| matches!(e, E::RootNotInTau { .. }),
        ),
        case(
            "insert with both neighbours untouched",
            even,
            step(&[8], "((. 5 .) 8 .)", 5, Insert),
            |e| *e == E::PendantLinkFailure { pendant: Key(4) },
        ),
        case(
            "inner insert touching nothing",
            even,
            step(&[], "(. 5 .)", 5, Insert),
            |e| *e == E::PendantLinkFailure { pendant: Key(8) },
        ),
        case(
            "right-side insert, neighbours untouched",
            even,
            step(&[8], "(. 8 (. 11 .))", 11, Insert),
            |e| *e == E::PendantLinkFailure { pendant: Key(12) },
        ),
        case(
            "delete with both neighbours untouched",
            even,
            step(&[8, 4], "(. 8 .)", 4, Delete),
            |e| matches!(e, E::PendantLinkFailure { .. }),
        ),
        case(
            "delete of a two-child root alone",
            even,
            step(&[8], ".", 8, Delete),
            |e| matches!(e, E::PendantLinkFailure { .. }),
        ),
        case(
            "delete right child alone",
            even,
            step(&[8, 12], "(. 8 .)", 12, Delete),
            |e| matches!(e, E::PendantLinkFailure { .. }),
        ),
    ]
}

/// Root-connected subsets of `tree` containing the node `k`.
fn connected_from(tree: &BSTree, k: Key) -> Vec<BTreeSet<Key>> {
    let mut out = vec![BTreeSet::from([k])];
    for c in [tree.left(k), tree.right(k)].into_iter().flatten() {
        let below = connected_from(tree, c);
        let mut next = out.clone();
        for a in &out {
            for b in &below {
                next.push(a.union(b).copied().collect());
            }
        }
        out = next;
    }
    out
}

/// Tries every root-connected touched set of a random tree on the even keys
/// `2, 4, .., 2 size` with every insertion of an odd key, every deletion and
/// a random new shape. An update must be accepted exactly when its key is
/// extreme or one of its tree neighbours is touched. Returns the number of
/// steps checked.
pub fn neighbour_sweep(size: u32, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prio: Vec<u64> = (0..=2 * size).map(|_| rng.gen()).collect();
    let tree = BSTree::treap((1..=size).map(|k| Key(2 * k)), |k| prio[k.0 as usize]);
    let mut sets = connected_from(&tree, tree.root().unwrap());
    sets.push(BTreeSet::new());
    let mut checked = 0;
    for tau in &sets {
        let mut trials: Vec<(Key, OpKind)> = (0..=size).map(|i| (Key(2 * i + 1), OpKind::Insert)).collect();
        trials.extend(tau.iter().map(|&k| (k, OpKind::Delete)));
        for (y, kind) in trials {
            let (x, z) = (tree.pred(y), tree.succ(y));
            let expect = x.is_none()
                || z.is_none()
                || x.is_some_and(|x| tau.contains(&x))
                || z.is_some_and(|z| tau.contains(&z));
            let mut keys = tau.clone();
            if kind == OpKind::Insert {
                keys.insert(y);
            } else {
                keys.remove(&y);
            }
            let shape_prio: Vec<u64> = (0..=2 * size + 1).map(|_| rng.gen()).collect();
            let step = Reconfiguration {
                tau: tau.clone(),
                tau_prime: BSTree::treap(keys, |k| shape_prio[k.0 as usize]),
                key: y,
                kind,
            };
            let verdict = validate_reconfiguration(&tree, &step);
            let ok = match &verdict {
                Ok(_) => true,
                // an empty touched set is only legal for insertions
                Err(ArborealError::RootNotInTau { .. }) if tau.is_empty() => false,
                Err(ArborealError::PendantLinkFailure { .. }) => false,
                Err(e) => {
                    return Err(format!(
                        "unexpected rejection {e:?} of {kind:?} {y} in {}",
                        tree.to_text()
                    ))
                }
            };
            if ok != expect {
                return Err(format!(
                    "{kind:?} {y} touching {tau:?} in {}: accepted={ok}, expected {expect}",
                    tree.to_text()
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
