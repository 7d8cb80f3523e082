mod common;

use std::sync::Arc;

use common::brute_violation;
use geobst::model::{check_satisfied, is_satisfied, side_fact_witness, Key, PointSet, UpdateSequence, Violation};
use geobst::sequences::random_mixed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid point set over a random sequence: every valid cell is kept
/// with probability `density`.
fn random_set(n: u32, m: usize, seed: u64, density: f64) -> PointSet {
    let seq = Arc::new(random_mixed(n, m, seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut cells = Vec::new();
    for t in 1..=seq.len() {
        for x in 1..=n {
            if seq.is_valid(Key(x), t) && rng.gen_bool(density) {
                cells.push((Key(x), t));
            }
        }
    }
    PointSet::new(seq, cells).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn fast_checker_agrees_with_brute_force(
        n in 1u32..=7, m in 1usize..=10, seed in any::<u64>(), density in 0.0f64..1.0,
    ) {
        let ps = random_set(n, m, seed, density);
        let fast = is_satisfied(&ps).unwrap();
        let slow = brute_violation(&ps, ps.horizon()).is_none();
        prop_assert_eq!(fast, slow, "{}", ps.to_text());
    }

    #[test]
    fn text_round_trip(n in 1u32..=7, m in 1usize..=10, seed in any::<u64>(), density in 0.0f64..1.0) {
        let ps = random_set(n, m, seed, density);
        prop_assert_eq!(PointSet::parse(&ps.to_text()).unwrap(), ps.clone());
        let seq = ps.sequence();
        prop_assert_eq!(&UpdateSequence::parse(&seq.to_text()).unwrap(), seq.as_ref());
    }

    // Validity of every cell agrees with the three-case rule applied to the
    // nearest update rows found by scanning the column.
    #[test]
    fn validity_matches_column_scan(n in 1u32..=6, m in 1usize..=12, seed in any::<u64>()) {
        let seq = random_mixed(n, m, seed);
        for x in 1..=n {
            for t in 1..=seq.len() {
                let kind_at = |s: u32| {
                    let op = seq.op(s);
                    (op.key == Key(x) && op.kind.is_update()).then_some(op.kind)
                };
                let here = kind_at(t);
                let below = (1..t).rev().find_map(kind_at);
                let above = (t + 1..=seq.len()).find_map(kind_at);
                use geobst::model::OpKind::*;
                let want = match here {
                    None => below != Some(Delete) && above != Some(Insert),
                    Some(Insert) => below != Some(Insert) && above != Some(Insert),
                    Some(_) => below != Some(Delete) && above != Some(Delete),
                };
                prop_assert_eq!(seq.is_valid(Key(x), t), want, "x={} t={}", x, t);
            }
        }
    }

    // For satisfied sets, every active non-aligned pair has the side witnesses.
    #[test]
    fn satisfied_sets_have_side_witnesses(n in 1u32..=6, m in 1usize..=9, seed in any::<u64>()) {
        let run = geobst::greedy::greedy_execute(Arc::new(random_mixed(n, m, seed)));
        let ps = &run.points;
        let seq = ps.sequence();
        let pts: Vec<_> = ps.points().collect();
        for p in &pts {
            for q in &pts {
                if p.t >= q.t || p.x == q.x {
                    continue;
                }
                let ap = seq.active_interval(p.x, p.t).unwrap();
                let aq = seq.active_interval(q.x, q.t).unwrap();
                if ap.contains(q.t) && aq.contains(p.t) {
                    prop_assert!(side_fact_witness(ps, p, q).is_ok(), "{} {}", p, q);
                }
            }
        }
    }
}

#[test]
fn reported_rectangle_is_a_real_violation() {
    for seed in 0..300 {
        let ps = random_set(6, 8, seed, 0.3);
        if let Some(Violation::EmptyRectangle { lower, upper }) = check_satisfied(&ps).unwrap() {
            assert!(brute_violation(&ps, upper.t).is_some());
            assert!(lower.t < upper.t);
        }
    }
}
