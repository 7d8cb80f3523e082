use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{apply_reconfiguration, BSTree, Execution, Reconfiguration};
use crate::model::{Key, OpKind, UpdateSequence};
use crate::sequences::rng_for;

fn random_shape(keys: impl IntoIterator<Item = Key>, rng: &mut ChaCha8Rng) -> BSTree {
    let prio: HashMap<Key, u64> = keys.into_iter().map(|k| (k, rng.gen())).collect();
    BSTree::treap(prio.keys().copied(), |k| prio[&k])
}

fn add_path(tree: &BSTree, tau: &mut BTreeSet<Key>, k: Key) {
    let mut cur = Some(k);
    while let Some(c) = cur {
        tau.insert(c);
        cur = tree.parent(c);
    }
}

/// A valid execution of `seq` with random shapes and touched sets. Each update
/// touches a neighbour unless the key is extreme and a coin says otherwise.
pub fn random_execution(seq: &UpdateSequence, seed: u64) -> Execution {
    let mut rng = rng_for(seed);
    let initial = random_shape(seq.initial_keys(), &mut rng);
    let mut tree = initial.clone();
    let mut steps = Vec::new();
    for op in seq.ops() {
        let y = op.key;
        let mut tau = BTreeSet::new();
        if op.kind != OpKind::Insert {
            add_path(&tree, &mut tau, y);
        }
        if op.kind != OpKind::Access {
            let nbrs: Vec<Key> = [tree.pred(y), tree.succ(y)].into_iter().flatten().collect();
            let extreme = nbrs.len() < 2;
            if !(nbrs.is_empty() || extreme && rng.gen_bool(0.5)) {
                add_path(&tree, &mut tau, *nbrs.choose(&mut rng).unwrap());
            }
        }
        for _ in 0..rng.gen_range(0..4) {
            if let Some(&k) = tau.iter().collect::<Vec<_>>().choose(&mut rng) {
                let c = if rng.gen() { tree.left(*k) } else { tree.right(*k) };
                tau.extend(c);
            }
        }
        let mut keys = tau.clone();
        match op.kind {
            OpKind::Insert => {
                keys.insert(y);
            }
            OpKind::Delete => {
                keys.remove(&y);
            }
            OpKind::Access => {}
        }
        let r = Reconfiguration {
            tau,
            tau_prime: random_shape(keys, &mut rng),
            key: y,
            kind: op.kind,
        };
        apply_reconfiguration(&mut tree, &r).expect("generator step is valid");
        steps.push(r);
    }
    Execution {
        universe: seq.universe(),
        initial,
        steps,
    }
}
