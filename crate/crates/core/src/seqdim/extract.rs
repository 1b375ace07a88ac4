//! Hereditary extraction of index sets whose every nonempty subset carries
//! entropy at least `|F'| * b / 4`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAX_WINDOW: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub indices: Vec<usize>,
    /// Set when no nonempty subset qualifies.
    pub diagnostic: Option<String>,
    /// Number of subsets checked in the final exhaustive verification.
    pub verified_subsets: u64,
}

fn subset(items: &[usize], mask: u32) -> Vec<usize> {
    items
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &x)| x)
        .collect()
}

fn qualifies(oracle: &dyn Fn(&[usize]) -> f64, set: &[usize], b: f64) -> bool {
    oracle(set) >= set.len() as f64 * b / 4.0
}

/// Greedy extraction over `window`.
///
/// Candidates are tried in order of descending singleton oracle value (ties
/// broken by smaller index); a candidate is kept if every subset containing
/// it still satisfies the bound. The returned set is then re-verified over
/// all `2^|F| - 1` nonempty subsets.
pub fn hereditary_extract(
    window: Range<usize>,
    oracle: &dyn Fn(&[usize]) -> f64,
    b: f64,
) -> Result<Extraction> {
    if window.len() > MAX_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "window of {} indices exceeds {MAX_WINDOW}",
            window.len()
        )));
    }
    let mut order: Vec<(usize, f64)> = window.map(|i| (i, oracle(&[i]))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut chosen: Vec<usize> = Vec::new();
    for (cand, _) in order {
        let ok = (0u32..1 << chosen.len()).all(|mask| {
            let mut set = subset(&chosen, mask);
            set.push(cand);
            set.sort_unstable();
            qualifies(oracle, &set, b)
        });
        if ok {
            chosen.push(cand);
        }
    }
    chosen.sort_unstable();

    let mut verified = 0u64;
    for mask in 1u32..1 << chosen.len() {
        let set = subset(&chosen, mask);
        assert!(
            qualifies(oracle, &set, b),
            "hereditary property broken on {set:?}"
        );
        verified += 1;
    }
    let diagnostic = chosen.is_empty().then(|| {
        format!("no nonempty subset reaches entropy |F'| * {b} / 4; b is too large for this oracle")
    });
    Ok(Extraction { indices: chosen, diagnostic, verified_subsets: verified })
}
