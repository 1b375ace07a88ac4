use entdim_core::entropy::{join_dist_bruteforce, join_dist_exact, product, Estimator, Partition};
use entdim_core::ratio::Ratio;
use entdim_core::schedule::toy_schedule;
use entdim_core::tower::{build, Ladder, StageLabel};
use num_traits::One;
use proptest::prelude::*;

const BUDGET: u64 = 2_000_000;

/// Random toy with at most a few thousand cells and one insertion at n = 2
/// when it has three stages.
fn toy() -> impl Strategy<Value = Ladder> {
    (1u64..=3, 1u64..=2, 1u64..=2, 1u64..=2, 1u64..=2, any::<bool>(), 2u64..=4).prop_map(
        |(e0, e1, e2, r1, r2, with_ins, hs)| {
            let (e, r) = (vec![e0, e1, e2], vec![r1, r2, 1]);
            let ins: Vec<(usize, usize, Option<u64>)> = if with_ins { vec![(2, 1, Some(hs))] } else { vec![] };
            let s = toy_schedule(&e, &r, &ins, Some(u64::MAX)).unwrap();
            build(&s, 3).unwrap()
        },
    )
}

fn partition(l: &Ladder, kind: u8, seed: u64) -> Partition {
    let stage = StageLabel::Base(1);
    let cells = l.tower(stage).unwrap().cells_u64().unwrap() as usize;
    match kind % 3 {
        0 => Partition::symbol(),
        1 => Partition::discrete(l, stage, BUDGET).unwrap(),
        _ => Partition::random_union(l, stage, 1 + (seed as usize % cells.max(1)), seed, BUDGET).unwrap(),
    }
}

fn positions(h: u64, raw: &[u64]) -> Vec<u64> {
    let mut p: Vec<u64> = raw.iter().map(|x| x % h.max(1)).collect();
    p.sort_unstable();
    p.dedup();
    p
}

fn h(d: &entdim_core::entropy::PatternDist) -> f64 {
    d.shannon(Estimator::PlugIn)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn engine_matches_bruteforce(l in toy(), kind in 0u8..3, seed in 0u64..1000, raw in prop::collection::vec(0u64..64, 1..4)) {
        let top = l.len() - 1;
        prop_assume!(l.towers[top].cells_u64().is_some_and(|c| c <= BUDGET));
        let part = partition(&l, kind, seed);
        let pos = positions(l.towers[top].height, &raw);
        let a = join_dist_exact(&l, top, &part, &pos, BUDGET).unwrap();
        let b = join_dist_bruteforce(&l, top, &part, &pos, BUDGET).unwrap();
        prop_assert_eq!(a.counts, b.counts);
        prop_assert_eq!(a.total, b.total);
    }

    #[test]
    fn subadditive_and_monotone(l in toy(), kind in 0u8..3, seed in 0u64..1000, raw in prop::collection::vec(0u64..64, 2..5)) {
        let top = l.len() - 1;
        let part = partition(&l, kind, seed);
        let pos = positions(l.towers[top].height, &raw);
        prop_assume!(pos.len() >= 2);
        let d = join_dist_exact(&l, top, &part, &pos, BUDGET).unwrap();
        let k = pos.len() / 2;
        let left: Vec<usize> = (0..k).collect();
        let right: Vec<usize> = (k..pos.len()).collect();
        let (hl, hr, hj) = (h(&d.marginal(&left)), h(&d.marginal(&right)), h(&d));
        prop_assert!(hj <= hl + hr + 1e-9);
        prop_assert!(hj + 1e-9 >= hl.max(hr));
        prop_assert!(d.is_normalized());
    }

    #[test]
    fn join_dominates_both(l in toy(), s1 in 0u64..1000, s2 in 0u64..1000, off in 0u64..64) {
        let top = l.len() - 1;
        let a = partition(&l, 2, s1);
        let b = partition(&l, 2, s2);
        let ab = a.join(&b).unwrap();
        let pos = positions(l.towers[top].height, &[off]);
        let ha = h(&join_dist_exact(&l, top, &a, &pos, BUDGET).unwrap());
        let hb = h(&join_dist_exact(&l, top, &b, &pos, BUDGET).unwrap());
        let hab = h(&join_dist_exact(&l, top, &ab, &pos, BUDGET).unwrap());
        prop_assert!(hab + 1e-9 >= ha.max(hb));
        prop_assert!(hab <= ha + hb + 1e-9);
    }

    #[test]
    fn product_is_additive(l in toy(), m in toy(), raw in prop::collection::vec(0u64..8, 2)) {
        let (tl, tm) = (l.len() - 1, m.len() - 1);
        let hmin = l.towers[tl].height.min(m.towers[tm].height);
        let pos = positions(hmin, &raw);
        let a = join_dist_exact(&l, tl, &Partition::symbol(), &pos, BUDGET).unwrap();
        let b = join_dist_exact(&m, tm, &Partition::symbol(), &pos, BUDGET).unwrap();
        let p = product(&a, &b);
        prop_assert!((h(&p) - h(&a) - h(&b)).abs() < 1e-9);
        prop_assert!(p.is_normalized());
    }

    #[test]
    fn measure_is_conserved(l in toy()) {
        for (i, t) in l.towers.iter().enumerate() {
            prop_assert_eq!(l.recomputed_measure(i), t.measure.clone());
        }
        prop_assert_eq!(&l.top().measure + l.pool.remaining(), Ratio::one());
    }
}
