use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::exact::join_dist_exact;
use super::partition::Partition;
use crate::ratio::{self, Ratio};
use crate::tower::{Ladder, StageLabel};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceViolation {
    pub level_sets: Vec<u64>,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub offsets: Vec<u64>,
    /// `((1 + h_l / c_n) / xi_l)^|B|`.
    pub factor: String,
    pub level_set_measure: String,
    pub choices_checked: u64,
    /// Largest `lhs / (factor * prod mu(E_b))` seen.
    pub max_ratio: f64,
    pub violations: Vec<IndependenceViolation>,
}

/// Check `mu(cap_b T^{-b} E_b) <= ((1 + h_l/c_n)/xi_l)^|B| prod mu(E_b)`
/// for every choice of level sets `E_b` of `W_l`.
///
/// The left side is `xi_K` times the window probability of reading `E_b`
/// at level `j + b` for all `b`, on tower `idx` (measure `xi_K`). When
/// `f_set` is given, `B` must lie inside it.
pub fn independence_check(
    ladder: &Ladder,
    idx: usize,
    n_t: usize,
    l_t: usize,
    b: &[u64],
    f_set: Option<&[u64]>,
    budget: u64,
) -> Result<IndependenceReport> {
    if let Some(f) = f_set {
        let fs: BTreeSet<u64> = f.iter().copied().collect();
        if let Some(x) = b.iter().find(|x| !fs.contains(x)) {
            return Err(Error::InvalidArgument(format!("offset {x} is not in the sumset; the bound is only claimed there")));
        }
    }
    let mut offsets = b.to_vec();
    offsets.sort_unstable();
    offsets.dedup();
    let wl = ladder.tower(StageLabel::Base(l_t))?;
    let wn = ladder.tower(StageLabel::Base(n_t))?;
    let part = Partition::discrete(ladder, StageLabel::Base(l_t), budget)?;
    let d = join_dist_exact(ladder, idx, &part, &offsets, budget)?;
    let k = offsets.len() as i32;
    let base = (Ratio::one() + Ratio::new(wl.height.into(), wn.column_count().into())) / &wl.measure;
    let factor = num_traits::pow(base, k as usize);
    let mu = wl.column_width.clone();
    let rhs = &factor * num_traits::pow(mu.clone(), k as usize);
    let xi_k = &ladder.towers[idx].measure;
    let n_sets = part.labels.len() as u64;
    let choices = BigUint::from(n_sets).pow(k as u32);
    let mut violations = Vec::new();
    let mut max_ratio = 0.0f64;
    for (p, c) in &d.counts {
        if p.iter().any(|&x| x == part.spacer_cell) || c.is_zero() {
            continue;
        }
        let lhs = xi_k * Ratio::new(c.clone().into(), d.total.clone().into());
        let r = ratio::to_f64(&(&lhs / &rhs));
        max_ratio = max_ratio.max(r);
        if lhs > rhs {
            violations.push(IndependenceViolation {
                level_sets: p.iter().map(|&x| x as u64).collect(),
                lhs: ratio::to_string(&lhs),
                rhs: ratio::to_string(&rhs),
            });
        }
    }
    Ok(IndependenceReport {
        offsets,
        factor: ratio::to_string(&factor),
        level_set_measure: ratio::to_string(&mu),
        choices_checked: choices.to_u64().unwrap_or(u64::MAX),
        max_ratio,
        violations,
    })
}
