//! Constructive sequence transforms.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::IntSeq;
use crate::{Error, Ratio, Result};

/// Upper cap on the number of power terms [`power_merge`] will generate.
const POWER_MERGE_CAP: usize = 100_000_000;

fn sorted_union(mut a: Vec<BigUint>) -> Vec<BigUint> {
    a.sort_unstable();
    a.dedup();
    a
}

/// `F = S ∪ {1..n_1} ∪ ⋃_i {s_{n_i}+1 .. n_{i+1}}`.
///
/// Anchors are 1-based indices into `S` with `n_{j+1} >= 2 s_{n_j}`. `S` is
/// extended through every anchor except the last, whose term is only used
/// when already available. The union includes every term of `S` currently
/// materialized.
pub fn densify(s: &mut IntSeq, anchors: &[usize]) -> Result<IntSeq> {
    let Some(&first) = anchors.first() else {
        return Err(Error::AnchorSpacing("at least one anchor is required".into()));
    };
    if first == 0 {
        return Err(Error::AnchorSpacing("anchors are 1-based".into()));
    }
    if anchors.len() > 1 {
        s.extend_to(anchors[anchors.len() - 2])?;
    }
    let mut out: Vec<BigUint> = s.terms().to_vec();
    out.extend((1..=first as u64).map(BigUint::from));
    for (j, pair) in anchors.windows(2).enumerate() {
        let (nj, next) = (pair[0], pair[1]);
        if next <= nj {
            return Err(Error::AnchorSpacing(format!("anchors not increasing at j = {}", j + 1)));
        }
        let snj = s.get(nj).expect("extended").clone();
        let next_big = BigUint::from(next);
        if next_big < &snj * 2u32 {
            return Err(Error::AnchorSpacing(format!(
                "n_{} = {next} < 2 s_{nj} = {}",
                j + 2,
                &snj * 2u32
            )));
        }
        let lo = snj.to_u64().unwrap_or(u64::MAX);
        out.extend((lo + 1..=next as u64).map(BigUint::from));
    }
    s.transformed("densify", sorted_union(out))
}

fn check_tau(tau: &Ratio) -> Result<(u32, u32)> {
    let p = tau.numer().to_u32();
    let q = tau.denom().to_u32();
    match (p, q) {
        (Some(p), Some(q)) if p > 0 && p < q => Ok((p, q)),
        _ => Err(Error::InvalidArgument(format!("tau = {tau} must lie in (0, 1)"))),
    }
}

/// `floor(n^(q/p))` exactly, i.e. `floor(n^(1/tau))` for `tau = p/q`.
pub(crate) fn floor_inv_power(n: u64, p: u32, q: u32) -> BigUint {
    BigUint::from(n).pow(q).nth_root(p)
}

/// `F = S ∪ {floor(n^(1/tau)) : n >= 1}`, truncated at the value
/// `max(s_last, floor(power_terms^(1/tau)))`.
pub fn power_merge(s: &IntSeq, tau: &Ratio, power_terms: usize) -> Result<IntSeq> {
    let (p, q) = check_tau(tau)?;
    let by_count = floor_inv_power(power_terms as u64, p, q);
    let bound = match s.terms().last() {
        Some(last) if *last > by_count => last.clone(),
        _ => by_count,
    };
    let mut out: Vec<BigUint> = s.terms().to_vec();
    let mut n = 1u64;
    loop {
        let v = floor_inv_power(n, p, q);
        if v > bound {
            break;
        }
        out.push(v);
        if out.len() > POWER_MERGE_CAP {
            return Err(Error::EnumerationInfeasible {
                what: "power_merge terms",
                size: format!("> {POWER_MERGE_CAP}"),
                budget: POWER_MERGE_CAP as u64,
            });
        }
        n += 1;
    }
    s.transformed("power_merge", sorted_union(out))
}

/// `kS = {k s : s ∈ S}`.
pub fn seq_scale(s: &IntSeq, k: u64) -> Result<IntSeq> {
    if k == 0 {
        return Err(Error::InvalidArgument("scale factor must be positive".into()));
    }
    let terms = s.terms().iter().map(|t| t * k).collect();
    s.transformed("scale", terms)
}

/// `{floor(s_i / k)}`, deduplicated; requires `s_1 >= k`.
pub fn seq_floor_div(s: &IntSeq, k: u64) -> Result<IntSeq> {
    if k == 0 {
        return Err(Error::InvalidArgument("divisor must be positive".into()));
    }
    if let Some(first) = s.terms().first() {
        if *first < BigUint::from(k) {
            return Err(Error::InvalidArgument(format!("s_1 = {first} < k = {k}")));
        }
    }
    let mut terms: Vec<BigUint> = s.terms().iter().map(|t| t.div_floor(&BigUint::from(k))).collect();
    terms.dedup();
    s.transformed("floor_div", terms)
}

/// Block reversal `f_m = s_{n_j} - s_{n_j - m}` for `n_{j-1} < m <= n_j`
/// (with `s_0 = 0`). Anchors need `n_1 >= 2` and
/// `n_{i+1} >= 1 + 2 (n_1 + ... + n_i)`. A non-increasing result is
/// reported, never repaired.
pub fn reverse_blocks(s: &mut IntSeq, anchors: &[usize]) -> Result<IntSeq> {
    let Some(&first) = anchors.first() else {
        return Err(Error::AnchorSpacing("at least one anchor is required".into()));
    };
    if first < 2 {
        return Err(Error::AnchorSpacing("n_1 must be >= 2".into()));
    }
    let mut sum = 0usize;
    for (i, &n) in anchors.iter().enumerate() {
        if i > 0 && n < 1 + 2 * sum {
            return Err(Error::AnchorSpacing(format!(
                "n_{} = {n} < 1 + 2 * {sum}",
                i + 1
            )));
        }
        sum += n;
    }
    let last = *anchors.last().expect("nonempty");
    s.extend_to(last)?;
    let term = |i: usize| -> BigUint {
        if i == 0 {
            BigUint::zero()
        } else {
            s.get(i).expect("extended").clone()
        }
    };
    let mut f: Vec<BigUint> = Vec::with_capacity(last);
    let mut prev = 0usize;
    for &nj in anchors {
        let top = term(nj);
        for m in (prev + 1)..=nj {
            f.push(&top - term(nj - m));
        }
        debug_assert_eq!(f[nj - 1], top);
        prev = nj;
    }
    if let Some(i) = f.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotoneReversal { index: i + 2 });
    }
    if f.first().is_some_and(|x| *x < BigUint::one()) {
        return Err(Error::NonMonotoneReversal { index: 1 });
    }
    s.transformed("reverse_blocks", f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;
    use crate::seqdim::estimate_dims_default;

    fn u(s: &IntSeq) -> Vec<u64> {
        s.to_u64().unwrap()
    }

    #[test]
    fn densify_naturals_is_identity() {
        let mut s = IntSeq::naturals().with_len(200).unwrap();
        let f = densify(&mut s, &[3, 6, 12]).unwrap();
        assert_eq!(u(&f), (1..=200).collect::<Vec<_>>());
    }

    #[test]
    fn densify_rejects_tight_anchors() {
        let mut s = IntSeq::powers_of_two();
        assert!(matches!(densify(&mut s, &[3, 15]), Err(Error::AnchorSpacing(_))));
        assert!(densify(&mut s, &[3, 16]).is_ok());
    }

    #[test]
    fn densify_counting_bound() {
        let mut s = IntSeq::powers_of_two().with_len(20).unwrap();
        let anchors = [3, 16, 131_072];
        let f = densify(&mut s, &anchors).unwrap();
        for &nj in &anchors[..2] {
            let snj = s.get(nj).unwrap();
            let count = f.terms().iter().filter(|t| *t <= snj).count();
            assert!(count <= 2 * nj, "anchor {nj}: {count}");
        }
    }

    #[test]
    fn power_merge_contains_floor_powers() {
        let s = IntSeq::explicit([1u32]).unwrap();
        let f = power_merge(&s, &ratio(1, 2), 100).unwrap();
        assert_eq!(u(&f)[..6], [1, 4, 9, 16, 25, 36]);
        let f = power_merge(&s, &ratio(2, 3), 50).unwrap();
        for n in 1..=50u64 {
            assert!(f.terms().contains(&floor_inv_power(n, 2, 3)));
        }
        assert!(power_merge(&s, &ratio(1, 1), 10).is_err());
    }

    #[test]
    fn scale_and_floor_div() {
        let sq = IntSeq::squares().with_len(3).unwrap();
        assert_eq!(u(&seq_scale(&sq, 2).unwrap()), vec![2, 8, 18]);
        assert_eq!(u(&seq_scale(&sq, 1).unwrap()), u(&sq));
        let s = IntSeq::explicit([4u32, 8, 12]).unwrap();
        assert_eq!(u(&seq_floor_div(&s, 4).unwrap()), vec![1, 2, 3]);
        let s = IntSeq::explicit([4u32, 5]).unwrap();
        assert_eq!(u(&seq_floor_div(&s, 4).unwrap()), vec![1]);
        let s = IntSeq::explicit([2u32, 5]).unwrap();
        assert!(seq_floor_div(&s, 4).is_err());
    }

    #[test]
    fn floor_div_preserves_squares_dimension() {
        let mut sq = IntSeq::squares().with_len(20_000).unwrap();
        let base = estimate_dims_default(&mut sq, 10_000).unwrap();
        let tail = IntSeq::explicit(sq.terms()[2..].to_vec()).unwrap();
        let mut d = seq_floor_div(&tail, 3).unwrap();
        let est = estimate_dims_default(&mut d, 10_000).unwrap();
        // dividing by 3 shifts ln s_n by ln 3, about 0.03 at this size
        assert!((est.lower - base.lower).abs() < 0.04);
        assert!((est.upper - base.upper).abs() < 0.04);
    }

    #[test]
    fn reverse_blocks_examples() {
        let mut s = IntSeq::naturals();
        let f = reverse_blocks(&mut s, &[2, 6]).unwrap();
        assert_eq!(u(&f), vec![1, 2, 3, 4, 5, 6]);
        let mut s = IntSeq::explicit([3u32, 7]).unwrap();
        assert_eq!(u(&reverse_blocks(&mut s, &[2]).unwrap()), vec![4, 7]);
    }

    #[test]
    fn reverse_blocks_anchor_rules() {
        let mut s = IntSeq::naturals();
        assert!(matches!(reverse_blocks(&mut s, &[1]), Err(Error::AnchorSpacing(_))));
        assert!(matches!(reverse_blocks(&mut s, &[2, 4]), Err(Error::AnchorSpacing(_))));
    }

    #[test]
    fn reverse_blocks_reports_non_monotone() {
        // f_1..f_2 from {1,100}: 99, 100; block 2 (n=5): f_3 = s_5 - s_2 = 3 < 100
        let mut s = IntSeq::explicit([1u32, 100, 101, 102, 103]).unwrap();
        assert!(matches!(
            reverse_blocks(&mut s, &[2, 5]),
            Err(Error::NonMonotoneReversal { index: 3 })
        ));
    }
}
