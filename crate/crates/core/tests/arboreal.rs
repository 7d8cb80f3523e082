mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::brute_violation;
use common::trees::{invalid_cases, neighbour_sweep};
use geobst::arboreal::{
    access_to_insertion, delete_via_neighbor, geometry_to_tree_offline, insert_via_neighbor, next_touch_time,
    random_execution, sort_via_bst, tree_to_geometry, validate_reconfiguration, ArborealError, BSTree, ChildSide,
    Execution, PointerChange, Route, Slot,
};
use geobst::greedy::greedy_execute;
use geobst::model::{is_satisfied, Key, Op, OpKind, PointSet, UpdateSequence};
use geobst::sequences::{random_mixed, random_permutation_access};
use proptest::prelude::*;

fn set(keys: &[u32]) -> BTreeSet<Key> {
    keys.iter().map(|&k| Key(k)).collect()
}

/// Performs pointer changes on a copy of `tree`, adding `new_key` as a
/// detached node first and dropping `gone` afterwards.
fn splice(tree: &BSTree, changes: &[PointerChange], new_key: Option<Key>, gone: Option<Key>) -> BSTree {
    let mut recs: std::collections::BTreeMap<Key, (Option<Key>, Option<Key>)> =
        tree.keys().map(|k| (k, (tree.left(k), tree.right(k)))).collect();
    let mut root = tree.root();
    if let Some(y) = new_key {
        recs.insert(y, (None, None));
    }
    for c in changes {
        match c.slot {
            Slot::Root => root = c.new,
            Slot::Child(k, ChildSide::Left) => recs.get_mut(&k).unwrap().0 = c.new,
            Slot::Child(k, ChildSide::Right) => recs.get_mut(&k).unwrap().1 = c.new,
        }
    }
    if let Some(y) = gone {
        recs.remove(&y);
    }
    BSTree::from_links(root, recs.into_iter().map(|(k, (l, r))| (k, l, r))).unwrap()
}

fn small_mixed() -> impl Strategy<Value = UpdateSequence> {
    (1u32..=12, 1usize..=40, any::<u64>()).prop_map(|(n, m, seed)| random_mixed(n, m, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn greedy_geometry_round_trips(seq in small_mixed()) {
        let run = greedy_execute(Arc::new(seq));
        let e = geometry_to_tree_offline(&run.points).unwrap();
        let replay = e.replay().unwrap();
        prop_assert_eq!(replay.touched, run.cost);
        prop_assert!(replay.cost <= run.cost);
        prop_assert_eq!(tree_to_geometry(&e).unwrap(), run.points.clone());
        let live: Vec<Key> = run.points.sequence().live_after(run.points.horizon());
        prop_assert_eq!(replay.final_tree.in_order(), live);
        prop_assert_eq!(Execution::parse(&e.to_text()).unwrap(), e);
    }

    #[test]
    fn executions_give_satisfied_sets(seq in small_mixed(), seed in any::<u64>()) {
        let e = random_execution(&seq, seed);
        let ps = tree_to_geometry(&e).unwrap();
        prop_assert!(is_satisfied(&ps).unwrap());
        prop_assert_eq!(brute_violation(&ps, ps.horizon()), None);
        prop_assert_eq!(ps.len(), e.replay().unwrap().touched);

        // and back: the converter reproduces the same touched sets
        let back = geometry_to_tree_offline(&ps).unwrap();
        prop_assert_eq!(tree_to_geometry(&back).unwrap(), ps);
    }

    #[test]
    fn neighbour_updates_are_valid(seq in small_mixed(), seed in any::<u64>()) {
        // replay a random execution, and at every update also try the
        // neighbour routine with the same touched set and its default shape
        let e = random_execution(&seq, seed);
        let mut tree = e.initial.clone();
        for r in &e.steps {
            let extreme = tree.pred(r.key).is_none() || tree.succ(r.key).is_none();
            let upd = match r.kind {
                OpKind::Insert => Some(insert_via_neighbor(&tree, r.tau.clone(), r.key, None)),
                OpKind::Delete => Some(delete_via_neighbor(&tree, r.tau.clone(), r.key, None)),
                OpKind::Access => None,
            };
            if let Some(upd) = upd {
                let upd = upd.unwrap();
                let (after, _) = validate_reconfiguration(&tree, &upd.reconfiguration).unwrap();
                after.check().unwrap();
                for c in &upd.changes {
                    if let Slot::Child(k, _) = c.slot {
                        prop_assert!(r.tau.contains(&k) || k == r.key);
                    }
                }
                if extreme {
                    prop_assert!(matches!(upd.route, Route::Extreme) || !r.tau.is_empty());
                }
                match (r.kind, upd.route) {
                    (OpKind::Insert, _) => {
                        prop_assert_eq!(splice(&tree, &upd.changes, Some(r.key), None), after);
                    }
                    (OpKind::Delete, Route::Extreme) => {
                        prop_assert_eq!(splice(&tree, &upd.changes, None, Some(r.key)), after);
                    }
                    (OpKind::Delete, Route::Pred(x)) => {
                        prop_assert_eq!(upd.changes[0].new, after.right(x));
                    }
                    (OpKind::Delete, Route::Succ(z)) => {
                        prop_assert_eq!(upd.changes[0].new, after.left(z));
                    }
                    _ => unreachable!(),
                }
            }
            tree = validate_reconfiguration(&tree, r).unwrap().0;
        }
    }
}

#[test]
fn invalid_reconfigurations_are_rejected() {
    let cases = invalid_cases();
    assert!(cases.len() >= 20);
    for c in cases {
        let err = validate_reconfiguration(&c.tree, &c.step).unwrap_err();
        assert!((c.expect)(&err), "{}: got {err:?}", c.name);
    }
}

#[test]
fn updates_need_a_touched_neighbour() {
    for seed in 0..30 {
        let checked = neighbour_sweep(1 + seed as u32 % 7, seed).unwrap();
        assert!(checked > 0);
    }
}

#[test]
fn neighbour_routines_need_a_touched_neighbour() {
    let tree = BSTree::parse("(((. 2 .) 4 (. 6 .)) 8 ((. 10 .) 12 (. 14 .)))").unwrap();
    let e = insert_via_neighbor(&tree, set(&[8]), Key(5), None).unwrap_err();
    assert_eq!(e, ArborealError::NeighbourMissing(Key(5)));
    let e = delete_via_neighbor(&tree, set(&[8, 4]), Key(4), None).unwrap_err();
    assert_eq!(e, ArborealError::NeighbourMissing(Key(4)));

    let upd = insert_via_neighbor(&tree, set(&[8, 4]), Key(5), None).unwrap();
    assert_eq!(upd.route, Route::Pred(Key(4)));
    assert_eq!(
        upd.changes,
        vec![
            PointerChange {
                slot: Slot::Child(Key(5), ChildSide::Right),
                new: Some(Key(6))
            },
            PointerChange {
                slot: Slot::Child(Key(4), ChildSide::Right),
                new: Some(Key(5))
            },
        ]
    );
    let upd = delete_via_neighbor(&tree, set(&[8, 12, 10]), Key(12), None).unwrap();
    assert_eq!(upd.route, Route::Pred(Key(10)));
    assert_eq!(
        upd.changes,
        vec![PointerChange {
            slot: Slot::Child(Key(10), ChildSide::Right),
            new: Some(Key(14))
        }]
    );
    let (after, cost) = validate_reconfiguration(&tree, &upd.reconfiguration).unwrap();
    assert_eq!(after.in_order(), [2, 4, 6, 8, 10, 14].map(Key));
    assert_eq!((cost.cost, cost.touched), (3, 3));

    let upd = delete_via_neighbor(&tree, set(&[8, 12, 14]), Key(14), None).unwrap();
    assert_eq!(upd.route, Route::Pred(Key(12)));
    let upd = delete_via_neighbor(&tree, set(&[8, 4, 2]), Key(2), None).unwrap();
    assert_eq!(upd.route, Route::Succ(Key(4)));
    assert_eq!(
        upd.changes,
        vec![PointerChange {
            slot: Slot::Child(Key(4), ChildSide::Left),
            new: None
        }]
    );

    let tree = BSTree::parse("((. 1 .) 3 ((. 4 .) 5 .))").unwrap();
    let upd = delete_via_neighbor(&tree, set(&[3, 5]), Key(5), None).unwrap();
    assert_eq!(upd.route, Route::Extreme);
    assert_eq!(
        upd.changes,
        vec![PointerChange {
            slot: Slot::Child(Key(3), ChildSide::Right),
            new: Some(Key(4))
        }]
    );
}

#[test]
fn empty_touched_set_only_for_extreme_inserts() {
    let tree = BSTree::parse("((. 2 .) 4 (. 6 .))").unwrap();
    let upd = insert_via_neighbor(&tree, BTreeSet::new(), Key(9), None).unwrap();
    assert_eq!(upd.route, Route::Extreme);
    let (after, cost) = validate_reconfiguration(&tree, &upd.reconfiguration).unwrap();
    assert_eq!(after.root(), Some(Key(9)));
    assert_eq!(after.left(Key(9)), Some(Key(4)));
    assert_eq!(cost.cost, 1);
    let upd = insert_via_neighbor(&BSTree::new(), BTreeSet::new(), Key(1), None).unwrap();
    assert_eq!(
        upd.changes,
        vec![PointerChange {
            slot: Slot::Root,
            new: Some(Key(1))
        }]
    );
}

#[test]
fn converter_rejects_unsatisfied_input() {
    let seq = Arc::new(random_permutation_access(10, 1));
    let ps = PointSet::from_sequence(seq);
    assert!(matches!(
        geometry_to_tree_offline(&ps),
        Err(ArborealError::Precondition(_))
    ));
}

#[test]
fn initial_tree_must_match_the_sequence() {
    let e = Execution::parse("3 1\ninit (. 1 .)\n1 A 1 ; 1 ; (. 1 .)\n").unwrap();
    // keys 2 and 3 are never inserted, so they belong to the initial tree
    assert!(matches!(tree_to_geometry(&e), Err(ArborealError::Precondition(_))));
    let e = Execution::parse("3 1\ninit (. 1 (. 2 (. 3 .)))\n1 A 1 ; 1 ; (. 1 .)\n").unwrap();
    assert_eq!(tree_to_geometry(&e).unwrap().len(), 1);
}

#[test]
fn execution_text_errors() {
    assert!(Execution::parse("").is_err());
    assert!(Execution::parse("2 1\ninit .\n").is_err());
    assert!(Execution::parse("2 1\ninit .\n1 X 1 ; ; (. 1 .)\n").is_err());
    assert!(Execution::parse("2 1\ninit .\n2 I 1 ; ; (. 1 .)\n").is_err());
    assert!(Execution::parse("2 1\ninit .\n1 I 1 ; ; (. 1 .\n").is_err());
    let e = Execution::parse("# comment\n2 2\ninit .\n1 I 2 ; ; (. 2 .)\n2 I 1 ; 2 ; ((. 1 .) 2 .)\n").unwrap();
    assert_eq!(e.replay().unwrap().final_tree.in_order(), vec![Key(1), Key(2)]);
    // an extreme insert may touch nothing, an inner one may not
    let ok = Execution::parse("2 2\ninit .\n1 I 2 ; ; (. 2 .)\n2 I 1 ; ; (. 1 .)\n").unwrap();
    assert!(ok.replay().is_ok());
    let bad = Execution::parse("3 3\ninit .\n1 I 1 ; ; (. 1 .)\n2 I 3 ; ; (. 3 .)\n3 I 2 ; ; (. 2 .)\n").unwrap();
    let err = bad.replay().unwrap_err();
    assert!(matches!(err, ArborealError::Step { t: 3, .. }));
    assert!(matches!(err.root_cause(), ArborealError::PendantLinkFailure { .. }));
}

#[test]
fn next_touch_scans_columns() {
    let seq = Arc::new(UpdateSequence::new(3, vec![Op::access(1), Op::access(2), Op::access(1)]).unwrap());
    let ps = PointSet::new(seq, [(Key(2), 3)]).unwrap();
    assert_eq!(next_touch_time(&ps, Key(1), 1), Some(1));
    assert_eq!(next_touch_time(&ps, Key(1), 2), Some(3));
    assert_eq!(next_touch_time(&ps, Key(2), 3), Some(3));
    assert_eq!(next_touch_time(&ps, Key(3), 1), None);
    assert_eq!(next_touch_time(&ps, Key(1), 4), None);
}

#[test]
fn sorting_through_insertions() {
    for (n, seed) in [(1u32, 0u64), (2, 1), (17, 2), (64, 3), (200, 4)] {
        let access = greedy_execute(Arc::new(random_permutation_access(n, seed)));
        let ins = access_to_insertion(&access.points).unwrap();
        assert_eq!(ins.len(), access.cost);
        assert!(is_satisfied(&ins).unwrap());
        assert_eq!(sort_via_bst(&ins).unwrap(), (1..=n).map(Key).collect::<Vec<_>>());
    }
    let not_perm = greedy_execute(Arc::new(
        UpdateSequence::new(2, vec![Op::access(1), Op::access(1)]).unwrap(),
    ));
    assert!(access_to_insertion(&not_perm.points).is_err());
}
