//! Reading `T^k` along `S` is reading `T` along `kS`: checked against
//! column names walked level by level.

use std::collections::BTreeMap;

use entdim_core::entropy::{join_dist_exact, Partition};
use entdim_core::schedule::toy_schedule;
use entdim_core::tower::{build, ColumnId};
use num_bigint::BigUint;

#[test]
fn power_of_shift_matches_scaled_offsets() {
    let s = toy_schedule(&[2, 1, 2], &[1, 2, 1], &[(2, 1, Some(3))], None).unwrap();
    let l = build(&s, 3).unwrap();
    let top = l.len() - 1;
    let h = l.towers[top].height;
    let names: Vec<Vec<u8>> = (0..l.towers[top].column_count_u64().unwrap())
        .map(|c| l.name_of(top, &ColumnId::from(c), 1 << 20).unwrap().into_bytes())
        .collect();
    let offsets = [0u64, 1, 3];
    for k in 1..=3u64 {
        let max = offsets.last().unwrap() * k;
        // T^k: k unit steps per offset unit
        let mut walked: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
        for name in &names {
            for j in 0..h - max {
                let pattern = offsets
                    .iter()
                    .map(|&o| {
                        let mut level = j;
                        for _ in 0..o * k {
                            level += 1;
                        }
                        match name[level as usize] {
                            b'0' => 0,
                            b'1' => 1,
                            _ => 2,
                        }
                    })
                    .collect();
                *walked.entry(pattern).or_default() += 1u32;
            }
        }
        let scaled: Vec<u64> = offsets.iter().map(|o| o * k).collect();
        let d = join_dist_exact(&l, top, &Partition::symbol(), &scaled, 1 << 20).unwrap();
        assert_eq!(d.counts, walked, "k = {k}");
    }
}
