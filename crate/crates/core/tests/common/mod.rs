//! Slow reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod trees;

use std::sync::Arc;

use geobst::model::{Key, Op, OpKind, Point, PointSet, Time, UpdateSequence};
use geobst::patterns::{BinaryMatrix, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Whether `r` counts as a third point of a rectangle over rows
/// `bottom..=top`.
fn counts(r: &Point, bottom: Time, top: Time) -> bool {
    !(r.t == bottom && r.is_deletion()) && !(r.t == top && r.is_insertion())
}

/// Cubic check of both satisfaction conditions over rows `1..=upto`, straight
/// from the definitions. Returns a description of the first problem found.
pub fn brute_violation(ps: &PointSet, upto: Time) -> Option<String> {
    let seq = ps.sequence();
    let pts: Vec<Point> = ps.points().filter(|p| p.t <= upto).collect();
    for p in &pts {
        if !seq.is_valid(p.x, p.t) {
            return Some(format!("invalid point {p}"));
        }
    }
    for p in &pts {
        for q in &pts {
            if !(p.t < q.t && p.x != q.x) {
                continue;
            }
            let ap = seq.active_interval(p.x, p.t).unwrap();
            let aq = seq.active_interval(q.x, q.t).unwrap();
            if !(ap.contains(q.t) && aq.contains(p.t)) {
                continue;
            }
            let (lo, hi) = (p.x.min(q.x), p.x.max(q.x));
            let ok = pts
                .iter()
                .any(|r| r != p && r != q && r.x >= lo && r.x <= hi && r.t >= p.t && r.t <= q.t && counts(r, p.t, q.t));
            if !ok {
                return Some(format!("empty rectangle {p} / {q}"));
            }
        }
    }
    for t in 1..=upto {
        let op = seq.op(t);
        if !op.kind.is_update() {
            continue;
        }
        let valid = |x: u32| seq.is_valid(Key(x), t);
        let pred = (1..op.key.0).rev().find(|&x| valid(x));
        let succ = (op.key.0 + 1..=seq.universe()).find(|&x| valid(x));
        if let (Some(a), Some(b)) = (pred, succ) {
            if !ps.contains(Key(a), t) && !ps.contains(Key(b), t) {
                return Some(format!("update at row {t} serves neither neighbour"));
            }
        }
    }
    None
}

pub fn brute_satisfied(ps: &PointSet) -> bool {
    brute_violation(ps, ps.horizon()).is_none()
}

/// Access-only GREEDY: at each row touch the accessed key and every column
/// whose last touch is visible from it, i.e. later than the last touch of
/// every column in between and of the accessed column itself.
pub fn classic_greedy(n: u32, keys: &[u32]) -> Vec<Vec<u32>> {
    let mut last = vec![0u32; n as usize + 1];
    let mut rows = Vec::new();
    for (i, &x) in keys.iter().enumerate() {
        let t = i as u32 + 1;
        let mut row = vec![x];
        let mut best = last[x as usize];
        for y in x + 1..=n {
            if last[y as usize] > best {
                row.push(y);
                best = last[y as usize];
            }
        }
        let mut best = last[x as usize];
        for y in (1..x).rev() {
            if last[y as usize] > best {
                row.push(y);
                best = last[y as usize];
            }
        }
        row.sort_unstable();
        for &y in &row {
            last[y as usize] = t;
        }
        rows.push(row);
    }
    rows
}

/// Keeps the first `t` operations of `seq` and appends `extra` random ones
/// that leave the initial tree unchanged. Keys outside the initial tree that
/// the prefix never touches are inserted first, so they stay out of it.
pub fn continue_randomly(seq: &UpdateSequence, t: Time, extra: usize, seed: u64) -> UpdateSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = seq.universe();
    let mut present: Vec<bool> = (1..=n).map(|x| seq.present_after(Key(x), t)).collect();
    let mut ops = seq.ops()[..t as usize].to_vec();
    for x in 1..=n {
        if !seq.initially_present(Key(x)) && !ops.iter().any(|o| o.key == Key(x)) {
            ops.push(Op::insert(x));
            present[x as usize - 1] = true;
        }
    }
    for _ in 0..extra {
        let k = rng.gen_range(1..=n);
        let slot = &mut present[k as usize - 1];
        let op = match (*slot, rng.gen_bool(0.5)) {
            (false, _) => Op::insert(k),
            (true, true) => Op::access(k),
            (true, false) => Op::delete(k),
        };
        *slot = op.kind != OpKind::Delete;
        ops.push(op);
    }
    UpdateSequence::new(n, ops).unwrap()
}

/// Rebuilds `ps` with row `t` replaced by `row`; rows above `t` keep only
/// their input points.
pub fn with_row(ps: &PointSet, t: Time, row: &[Key]) -> PointSet {
    let mut cells: Vec<(Key, Time)> = Vec::new();
    for s in 1..t {
        cells.extend(ps.row(s).iter().map(|&x| (x, s)));
    }
    cells.extend(row.iter().map(|&x| (x, t)));
    PointSet::new(Arc::clone(ps.sequence()), cells).unwrap()
}

/// All `k`-subsets of `1..=n` in lexicographic order.
fn subsets(n: u32, k: usize) -> Vec<Vec<u32>> {
    fn go(start: u32, n: u32, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            cur.push(x);
            go(x + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Tries every row subset and every column subset.
pub fn exhaustive(m: &BinaryMatrix, p: &Pattern) -> bool {
    let (a, b) = (p.matrix.rows() as usize, p.matrix.cols() as usize);
    let cols = subsets(m.cols(), b);
    subsets(m.rows(), a).iter().any(|rows| {
        cols.iter().any(|cs| {
            p.matrix
                .cells()
                .all(|(i, j)| m.get(rows[i as usize - 1], cs[j as usize - 1]))
        })
    })
}

pub fn random_matrix(rows: u32, cols: u32, density: f64, seed: u64) -> BinaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<(u32, u32)> = (1..=rows)
        .flat_map(|r| (1..=cols).map(move |c| (r, c)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    BinaryMatrix::from_ones(rows, cols, cells).unwrap()
}
