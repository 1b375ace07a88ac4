//! The three-offset independence bound depends on how the spacer offset of
//! a segment is chosen. With the offset taken from the next segment's
//! digit, three consecutive segments are correlated and the bound can fail
//! by a few percent. These tests pin both sides of that finding.

use entdim_core::entropy::independence_check;
use entdim_core::schedule::{ft_sequence, toy_schedule};
use entdim_core::tower::{build, StageLabel};

fn scan(r: &[u64], max_b: usize) -> (usize, f64) {
    let s = toy_schedule(&[2, 3, 8], r, &[(2, 1, None)], Some(u64::MAX)).unwrap();
    let l = build(&s, 3).unwrap();
    let idx = l.index_of(StageLabel::Base(3)).unwrap();
    let f0 = ft_sequence(&s, 1, 0, usize::MAX).unwrap().offsets_u64().unwrap();
    let (mut bad, mut worst) = (0, 0f64);
    // consecutive runs starting at 0 are where the coupling shows
    for len in 1..=max_b {
        let b = &f0[..len];
        let rep = independence_check(&l, idx, 2, 1, b, Some(&f0), u64::MAX).unwrap();
        bad += rep.violations.len();
        worst = worst.max(rep.max_ratio);
    }
    (bad, worst)
}

#[test]
fn bound_holds_without_repetition() {
    let (bad, worst) = scan(&[1, 1, 1], 3);
    assert_eq!(bad, 0);
    assert!(worst < 1.0);
}

#[test]
fn two_offsets_never_violate() {
    assert_eq!(scan(&[1, 4, 1], 2).0, 0);
}

#[test]
fn three_consecutive_offsets_can_violate() {
    let (bad, worst) = scan(&[1, 4, 1], 3);
    assert!(bad > 0);
    assert!(worst > 1.0 && worst < 1.2, "max ratio {worst}");
}

#[test]
fn offsets_outside_the_sumset_are_rejected() {
    let s = toy_schedule(&[2, 3, 8], &[1, 1, 1], &[(2, 1, None)], Some(u64::MAX)).unwrap();
    let l = build(&s, 3).unwrap();
    let f0 = ft_sequence(&s, 1, 0, usize::MAX).unwrap().offsets_u64().unwrap();
    assert!(independence_check(&l, 6, 2, 1, &[1], Some(&f0), u64::MAX).is_err());
}
