//! Workload construction: deque sequences and their concentrated form,
//! sequential access simulated by deletions, permutation accesses and mixed
//! random sequences.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Key, ModelError, Op, OpKind, Time, UpdateSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Min,
    Max,
}

/// One deque operation: an insertion or deletion at one end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DequeOp {
    pub side: Side,
    pub kind: OpKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("row {t}: {reason}")]
    NotDeque { t: Time, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sampling knobs for the generators.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GenConfig {
    /// Probability that a deque step is an insertion.
    pub insert_bias: f64,
    /// Probability that a deque step acts on the minimum end.
    pub min_bias: f64,
    /// Probability that a key belongs to the initial tree.
    pub initial_density: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            insert_bias: 0.6,
            min_bias: 0.5,
            initial_density: 0.1,
        }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random deque sequence of `m` operations over keys drawn from `[1, n]`.
///
/// Keys that are never in the tree are dropped and the rest relabelled in
/// order, so the returned universe may be smaller than `n`. With
/// `restricted` every deletion removes the minimum.
pub fn gen_deque(n: u32, m: usize, seed: u64, restricted: bool) -> UpdateSequence {
    gen_deque_with(n, m, seed, restricted, &GenConfig::default())
}

pub fn gen_deque_with(n: u32, m: usize, seed: u64, restricted: bool, cfg: &GenConfig) -> UpdateSequence {
    assert!(n >= 1, "universe must be non-empty");
    let mut rng = rng_for(seed);
    let initial: Vec<u32> = (1..=n).filter(|_| rng.gen_bool(cfg.initial_density)).collect();
    let mut live: BTreeSet<u32> = initial.iter().copied().collect();
    let mut ops = Vec::with_capacity(m);
    while ops.len() < m {
        let want_insert = live.is_empty() || rng.gen_bool(cfg.insert_bias);
        let side = if rng.gen_bool(cfg.min_bias) {
            Side::Min
        } else {
            Side::Max
        };
        if want_insert {
            let lo = live.first().copied();
            let hi = live.last().copied();
            let key = match (lo, hi) {
                (Some(lo), Some(hi)) => {
                    let below = (lo > 1).then_some(1..lo);
                    let above = (hi < n).then(|| hi + 1..n + 1);
                    let range = match side {
                        Side::Min => below.or(above),
                        Side::Max => above.or(below),
                    };
                    range.map(|r| rng.gen_range(r))
                }
                _ => Some(rng.gen_range(1..=n)),
            };
            if let Some(k) = key {
                live.insert(k);
                ops.push(Op::insert(k));
                continue;
            }
        }
        // deletion, or an insertion with no free key on either side
        let side = if restricted { Side::Min } else { side };
        let k = match side {
            Side::Min => live.pop_first(),
            Side::Max => live.pop_last(),
        }
        .expect("tree is non-empty here");
        ops.push(Op::delete(k));
    }
    compress(n, &initial, ops)
}

/// Drops keys that are never present and relabels the rest by rank.
fn compress(n: u32, initial: &[u32], ops: Vec<Op>) -> UpdateSequence {
    let mut used = vec![false; n as usize + 1];
    for &k in initial {
        used[k as usize] = true;
    }
    for op in &ops {
        used[op.key.0 as usize] = true;
    }
    let mut label = vec![0u32; n as usize + 1];
    let mut next = 0;
    for k in 1..=n as usize {
        if used[k] {
            next += 1;
            label[k] = next;
        }
    }
    let ops = ops
        .into_iter()
        .map(|op| Op::new(label[op.key.0 as usize], op.kind))
        .collect();
    UpdateSequence::new(next.max(1), ops).expect("generator keeps presence consistent")
}

/// Classifies every operation of a deque sequence. Insertions into an empty
/// tree and deletions of the last key count as `Min`.
pub fn deque_ops(seq: &UpdateSequence) -> Result<Vec<DequeOp>, SequenceError> {
    let mut live: BTreeSet<Key> = seq.initial_keys().into_iter().collect();
    let mut out = Vec::with_capacity(seq.len() as usize);
    for (i, op) in seq.ops().iter().enumerate() {
        let t = i as Time + 1;
        let x = op.key;
        let lo = live.first().copied();
        let hi = live.last().copied();
        let side = match op.kind {
            OpKind::Access => {
                return Err(SequenceError::NotDeque {
                    t,
                    reason: "access operation".into(),
                })
            }
            OpKind::Insert if lo.is_none_or(|lo| x < lo) => Side::Min,
            OpKind::Insert if hi.is_some_and(|hi| x > hi) => Side::Max,
            OpKind::Delete if lo == Some(x) => Side::Min,
            OpKind::Delete if hi == Some(x) => Side::Max,
            _ => {
                return Err(SequenceError::NotDeque {
                    t,
                    reason: format!("{:?} of {x} away from both ends", op.kind),
                })
            }
        };
        match op.kind {
            OpKind::Insert => live.insert(x),
            _ => live.remove(&x),
        };
        out.push(DequeOp { side, kind: op.kind });
    }
    Ok(out)
}

pub fn is_deque(seq: &UpdateSequence) -> bool {
    deque_ops(seq).is_ok()
}

pub fn is_output_restricted(seq: &UpdateSequence) -> bool {
    deque_ops(seq).is_ok_and(|ops| ops.iter().all(|d| d.kind != OpKind::Delete || d.side == Side::Min))
}

/// Sets of keys deleted so far as the minimum (`left`) and as a non-minimum
/// (`right`), plus the live keys.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConcentrationState {
    pub left: BTreeSet<Key>,
    pub right: BTreeSet<Key>,
    pub live: BTreeSet<Key>,
}

/// `Ok(None)` when the sequence is concentrated, otherwise the first row whose
/// insertion lands on the wrong side of the deleted keys.
pub fn is_concentrated(seq: &UpdateSequence) -> Result<Option<Time>, SequenceError> {
    deque_ops(seq)?;
    let mut st = ConcentrationState {
        live: seq.initial_keys().into_iter().collect(),
        ..Default::default()
    };
    for (i, op) in seq.ops().iter().enumerate() {
        let x = op.key;
        let is_min = st.live.first().is_none_or(|&lo| x <= lo);
        let is_max = st.live.last().is_none_or(|&hi| x >= hi);
        match op.kind {
            OpKind::Insert => {
                let bad_min = is_min && st.left.last().is_some_and(|&y| y >= x);
                let bad_max = is_max && st.right.first().is_some_and(|&y| y <= x);
                if bad_min || bad_max {
                    return Ok(Some(i as Time + 1));
                }
                st.live.insert(x);
            }
            OpKind::Delete => {
                if is_min {
                    st.left.insert(x);
                } else {
                    st.right.insert(x);
                }
                st.live.remove(&x);
            }
            OpKind::Access => unreachable!("rejected by deque_ops"),
        }
    }
    Ok(None)
}

/// Relabels a deque sequence into a concentrated one with the same shape.
///
/// Every key occurrence (an initial key, or one insertion together with its
/// matching deletion) gets its own label. Live occurrences are kept as a
/// deque; a deletion at the minimum moves the occurrence to the top of the
/// left band, any other deletion to the bottom of the right band. Labels are
/// ranks in `left ++ live ++ right`, so the live order agrees with the input
/// after every prefix.
pub fn concentrate(seq: &UpdateSequence) -> Result<UpdateSequence, SequenceError> {
    let shape = deque_ops(seq)?;
    let initial = seq.initial_keys();
    let inserts = shape.iter().filter(|d| d.kind == OpKind::Insert).count();
    let total = initial.len() + inserts;

    let mut live: VecDeque<usize> = (0..initial.len()).collect();
    let mut left: Vec<usize> = Vec::new();
    let mut right: Vec<usize> = Vec::new();
    let mut next = initial.len();
    // occurrence id per row
    let mut row_occ = Vec::with_capacity(shape.len());
    for d in &shape {
        let id = match (d.kind, d.side) {
            (OpKind::Insert, Side::Min) => {
                live.push_front(next);
                next += 1;
                next - 1
            }
            (OpKind::Insert, Side::Max) => {
                live.push_back(next);
                next += 1;
                next - 1
            }
            (_, Side::Min) => {
                let id = live.pop_front().expect("deque_ops checked presence");
                left.push(id);
                id
            }
            (_, Side::Max) => {
                let id = live.pop_back().expect("deque_ops checked presence");
                right.push(id);
                id
            }
        };
        row_occ.push(id);
    }
    debug_assert_eq!(next, total);

    let mut label = vec![0u32; total];
    let order = left.iter().chain(live.iter()).chain(right.iter().rev());
    for (rank, &id) in order.enumerate() {
        label[id] = rank as u32 + 1;
    }
    let ops = shape
        .iter()
        .zip(&row_occ)
        .map(|(d, &id)| Op::new(label[id], d.kind))
        .collect();
    Ok(UpdateSequence::new(total.max(1) as u32, ops)?)
}

/// Sequential access simulated by deleting the minimum of `[1..n]` `n`
/// times.
pub fn sequential_as_deletions(n: u32) -> UpdateSequence {
    let ops = (1..=n).map(Op::delete).collect();
    UpdateSequence::new(n, ops).expect("each key deleted once from the initial tree")
}

/// Accesses of a uniformly random permutation of `[1..n]`.
pub fn random_permutation_access(n: u32, seed: u64) -> UpdateSequence {
    let mut keys: Vec<u32> = (1..=n).collect();
    keys.shuffle(&mut rng_for(seed));
    UpdateSequence::new(n, keys.into_iter().map(Op::access).collect()).expect("keys in range")
}

/// Mixed random sequence of accesses, insertions and deletions over `[1, n]`.
/// Each key starts in the tree with probability one half; every step picks a
/// uniform key and accesses or deletes it if present, inserts it otherwise.
pub fn random_mixed(n: u32, m: usize, seed: u64) -> UpdateSequence {
    let mut rng = rng_for(seed);
    let mut present: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut ops = Vec::with_capacity(m);
    for _ in 0..m {
        let k = rng.gen_range(1..=n);
        let slot = &mut present[k as usize - 1];
        let op = if !*slot {
            *slot = true;
            Op::insert(k)
        } else if rng.gen_bool(0.5) {
            Op::access(k)
        } else {
            *slot = false;
            Op::delete(k)
        };
        ops.push(op);
    }
    UpdateSequence::new(n, ops).expect("presence tracked per key")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic_and_valid() {
        for seed in 0..50 {
            let a = gen_deque(40, 120, seed, false);
            assert_eq!(a, gen_deque(40, 120, seed, false));
            assert_eq!(a.len(), 120);
            assert!(is_deque(&a), "seed {seed}");
            let r = gen_deque(40, 120, seed, true);
            assert!(is_output_restricted(&r), "seed {seed}");
        }
    }

    #[test]
    fn inserts_only_is_a_deque() {
        let s = UpdateSequence::new(3, vec![Op::insert(2), Op::insert(3), Op::insert(1)]).unwrap();
        let d = deque_ops(&s).unwrap();
        assert_eq!(
            d.iter().map(|d| d.side).collect::<Vec<_>>(),
            vec![Side::Min, Side::Max, Side::Min]
        );
        assert_eq!(is_concentrated(&s).unwrap(), None);
    }

    #[test]
    fn access_is_not_a_deque_op() {
        let s = UpdateSequence::new(2, vec![Op::access(1)]).unwrap();
        assert!(matches!(deque_ops(&s), Err(SequenceError::NotDeque { t: 1, .. })));
        let s = UpdateSequence::new(3, vec![Op::delete(2)]).unwrap();
        assert!(deque_ops(&s).is_err());
    }

    #[test]
    fn max_inserts_then_min_deletes_is_concentrated() {
        let mut ops: Vec<Op> = (1..=5).map(Op::insert).collect();
        ops.extend((1..=5).map(Op::delete));
        let s = UpdateSequence::new(5, ops).unwrap();
        assert_eq!(is_concentrated(&s).unwrap(), None);
    }

    #[test]
    fn reinserting_a_min_deleted_key_as_minimum_violates() {
        let s = UpdateSequence::new(2, vec![Op::insert(1), Op::insert(2), Op::delete(1), Op::insert(1)]).unwrap();
        assert_eq!(is_concentrated(&s).unwrap(), Some(4));
    }

    #[test]
    fn concentrate_splits_reused_key() {
        // insert 2, delete-min 2, insert 2 as a new maximum
        let s = UpdateSequence::new(2, vec![Op::insert(1), Op::delete(1), Op::insert(2), Op::insert(1)]).unwrap();
        let c = concentrate(&s).unwrap();
        let keys: Vec<u32> = c.ops().iter().map(|o| o.key.0).collect();
        assert_ne!(keys[0], keys[3]);
        assert_eq!(is_concentrated(&c).unwrap(), None);
    }

    #[test]
    fn sequential_and_permutation_workloads() {
        let s = sequential_as_deletions(3);
        assert!(is_output_restricted(&s));
        let p = random_permutation_access(10, 7);
        let mut keys: Vec<u32> = p.ops().iter().map(|o| o.key.0).collect();
        assert_eq!(p, random_permutation_access(10, 7));
        keys.sort_unstable();
        assert_eq!(keys, (1..=10).collect::<Vec<_>>());
        assert_eq!(random_permutation_access(1, 3).len(), 1);
    }

    #[test]
    fn mixed_generator_is_valid() {
        for seed in 0..20 {
            let s = random_mixed(10, 50, seed);
            assert_eq!(s.len(), 50);
        }
    }
}
