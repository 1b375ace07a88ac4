//! Entropy-dimension estimates for partitions and finite checks of the
//! construction's entropy lemmas.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    entropy_profile, join_dist_exact, EntropyProfile, Estimator, Mode, Partition,
};
use crate::ratio::{self, Ratio};
use crate::schedule::SymbolicDims;
use crate::seqdim::{estimate_dims_default, hereditary_extract, IntSeq};
use crate::tower::{Ladder, StageLabel};
use crate::{Error, Result, SCHEMA_VERSION};

/// Tail window for `H_n / n`: the last 10% of points, at least 2.
pub fn egs_window(n: usize) -> usize {
    (n / 10).max(2).min(n)
}

/// Entropy-generating test: `min H_n / n >= threshold` over the tail
/// window, with at least one positive `H_n` there.
pub fn egs_test(profile: &EntropyProfile, threshold: f64) -> bool {
    egs_test_window(profile, threshold, egs_window(profile.points.len()))
}

pub fn egs_test_window(profile: &EntropyProfile, threshold: f64, window: usize) -> bool {
    let n = profile.points.len();
    if n == 0 || window == 0 {
        return false;
    }
    let tail = &profile.points[n - window.min(n)..];
    let min = tail.iter().map(|p| p.h_per_n).fold(f64::INFINITY, f64::min);
    min >= threshold && tail.iter().any(|p| p.h > 0.0)
}

/// Minimum of `H_n / n` over the default tail window.
pub fn tail_rate(profile: &EntropyProfile) -> f64 {
    let n = profile.points.len();
    profile.points[n - egs_window(n)..]
        .iter()
        .map(|p| p.h_per_n)
        .fold(f64::INFINITY, f64::min)
}

/// A candidate sequence: `offsets` are the entropy positions that fit in
/// the tower, `seq` the (possibly much longer) sequence whose dimension is
/// estimated. `symbolic` replaces the estimate from `seq` when the
/// sequence has a closed form (`F^t`).
#[derive(Clone, Debug)]
pub struct Candidate {
    pub name: String,
    pub seq: IntSeq,
    pub offsets: Vec<u64>,
    pub symbolic: Option<SymbolicDims>,
}

impl Candidate {
    pub fn from_seq(name: &str, seq: IntSeq) -> Result<Self> {
        let offsets = seq.to_u64()?;
        Ok(Candidate { name: name.to_string(), seq, offsets, symbolic: None })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DimConfig {
    pub mode: Mode,
    pub threshold: f64,
    /// Prefix length for the sequence dimension estimate (default: all
    /// known terms).
    pub seq_n_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub seq: String,
    pub positions: usize,
    pub egs: bool,
    pub tail_rate: f64,
    pub dim_lo: Option<f64>,
    pub dim_hi: Option<f64>,
    pub profile: EntropyProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperFit {
    pub candidate: String,
    /// Max over the tail of `log2 log2 N_n / log2 n`.
    pub tau_hat: f64,
    /// Least-squares slope of `log2 log2 N_n` against `log2 n` on the tail.
    pub slope: f64,
    pub rms_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionDimReport {
    pub schema_version: u32,
    pub tower: String,
    pub partition: String,
    pub candidates: Vec<CandidateReport>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<UpperFit>,
    /// Lower bound above the upper fit: windows too short to decide.
    pub inconclusive: bool,
}

fn upper_fit(c: &CandidateReport) -> Option<UpperFit> {
    let pts: Vec<(f64, f64)> = c
        .profile
        .points
        .iter()
        .filter(|p| p.n >= 2 && p.name_count >= 3)
        .map(|p| ((p.n as f64).log2(), (p.name_count as f64).log2().log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let tail = &pts[pts.len() - egs_window(pts.len())..];
    let tau_hat = tail.iter().map(|(x, y)| y / x).fold(f64::NEG_INFINITY, f64::max);
    let k = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / k;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rms = (tail.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / k).sqrt();
    Some(UpperFit { candidate: c.seq.clone(), tau_hat, slope, rms_residual: rms })
}

/// `(log2 N_n - n^tau) / ln n` for `n >= 2`: the counting bound allows
/// only a polynomial factor over `2^(n^tau)`, so this should stay bounded.
pub fn name_growth_excess(profile: &EntropyProfile, tau: f64) -> Vec<f64> {
    profile
        .points
        .iter()
        .filter(|p| p.n >= 2)
        .map(|p| ((p.name_count.max(1) as f64).log2() - (p.n as f64).powf(tau)) / (p.n as f64).ln())
        .collect()
}

/// Lower bound: best sequence-dimension estimate among candidates that
/// pass the entropy-generating test. Upper bound: name-count growth
/// exponent on the candidate with the most positions.
pub fn partition_dim_estimate(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    candidates: &[Candidate],
    cfg: &DimConfig,
) -> Result<PartitionDimReport> {
    let h = ladder.towers[idx].height;
    let mut reports = Vec::new();
    for c in candidates {
        let offsets: Vec<u64> = c.offsets.iter().copied().take_while(|&s| s < h).collect();
        if offsets.is_empty() {
            continue;
        }
        let profile = entropy_profile(ladder, idx, part, &offsets, offsets.len(), cfg.mode, &c.name)?;
        let egs = egs_test(&profile, cfg.threshold);
        let dims = match &c.symbolic {
            Some(d) => Some((d.lower, d.upper)),
            None => {
                let mut seq = c.seq.clone();
                let n = cfg.seq_n_max.unwrap_or(seq.len());
                estimate_dims_default(&mut seq, n).ok().map(|d| (d.lower, d.upper))
            }
        };
        reports.push(CandidateReport {
            seq: c.name.clone(),
            positions: offsets.len(),
            egs,
            tail_rate: tail_rate(&profile),
            dim_lo: dims.map(|d| d.0),
            dim_hi: dims.map(|d| d.1),
            profile,
        });
    }
    // no generating candidate gives the trivial bound 0
    let lower_bound = (!reports.is_empty()).then(|| {
        reports
            .iter()
            .filter(|r| r.egs)
            .filter_map(|r| r.dim_lo)
            .fold(0.0, f64::max)
    });
    let densest = reports.iter().max_by_key(|r| r.positions);
    let upper_bound = densest.and_then(upper_fit);
    let inconclusive = matches!((&lower_bound, &upper_bound), (Some(lo), Some(up)) if *lo > up.tau_hat);
    Ok(PartitionDimReport {
        schema_version: SCHEMA_VERSION,
        tower: ladder.towers[idx].label.to_string(),
        partition: part.descriptor.clone(),
        candidates: reports,
        lower_bound,
        upper_bound,
        inconclusive,
    })
}

/// `c(A) = -1/2 mu log2(mu / (1 - mu))` in bits.
pub fn c_of(mu: f64) -> f64 {
    -0.5 * mu * (mu / (1.0 - mu)).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub mu_a: String,
    pub xi_ell: String,
    pub mu_at_most_half_xi: bool,
    pub l_t_at_least_ell: bool,
    /// `log2((1 + h_{l_t} / c_{n_t}) / xi_{l_t})`.
    pub smallness_lhs: f64,
    pub smallness_holds: bool,
}

impl Hypothesis {
    pub fn met(&self) -> bool {
        self.mu_at_most_half_xi && self.l_t_at_least_ell && self.smallness_holds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub m: usize,
    pub h: f64,
    pub bound: f64,
    pub std_error: f64,
    /// `(H - bound) / std_error` in sampling mode.
    pub margin_se: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub schema_version: u32,
    pub c_a: f64,
    pub hypothesis: Hypothesis,
    pub hypothesis_met: bool,
    pub rows: Vec<BoundRow>,
    pub all_pass: bool,
}

/// Minimum margin, in standard errors, for a sampled row to pass.
pub const SAMPLED_MARGIN_SE: f64 = 3.0;

/// Check `H_m >= m c(A)` along the first `m_max` offsets, where `part` is
/// `{A, A^c}` read at stage `W_ell` (cell 0 is `A`) and `(n_t, l_t)` is the
/// insertion generating the offsets.
pub fn verify_lower_bound(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    offsets: &[u64],
    m_max: usize,
    n_t: usize,
    l_t: usize,
    mode: Mode,
) -> Result<LowerBoundReport> {
    let StageLabel::Base(ell) = part.ref_stage else {
        return Err(Error::InvalidArgument("the partition must be read at a stage W_l".into()));
    };
    let mu = part.level_measure(ladder, 0)?;
    let w_ell = ladder.tower(part.ref_stage)?;
    let w_lt = ladder.tower(StageLabel::Base(l_t))?;
    let w_nt = ladder.tower(StageLabel::Base(n_t))?;
    let mu_f = ratio::to_f64(&mu);
    let c_a = c_of(mu_f);
    let factor = (Ratio::from_integer(1.into()) + Ratio::new(w_lt.height.into(), w_nt.column_count().into())) / &w_lt.measure;
    let smallness_lhs = ratio::log2(&factor);
    let hypothesis = Hypothesis {
        mu_a: ratio::to_string(&mu),
        xi_ell: ratio::to_string(&w_ell.measure),
        mu_at_most_half_xi: mu > Ratio::from_integer(0.into()) && mu.clone() * Ratio::from_integer(2.into()) <= w_ell.measure,
        l_t_at_least_ell: l_t >= ell,
        smallness_lhs,
        smallness_holds: smallness_lhs < c_a,
    };
    let m_max = m_max.min(offsets.len());
    let profile = entropy_profile(ladder, idx, part, &offsets[..m_max], m_max, mode, "F")?;
    let sampled = matches!(mode, Mode::Sample(_));
    let rows: Vec<BoundRow> = profile
        .points
        .iter()
        .map(|p| {
            let bound = p.n as f64 * c_a;
            let margin_se = sampled.then(|| (p.h - bound) / p.std_error.max(f64::MIN_POSITIVE));
            let pass = match margin_se {
                Some(m) => m >= SAMPLED_MARGIN_SE,
                None => p.h >= bound,
            };
            BoundRow { m: p.n, h: p.h, bound, std_error: p.std_error, margin_se, pass }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(LowerBoundReport {
        schema_version: SCHEMA_VERSION,
        c_a,
        hypothesis_met: hypothesis.met(),
        hypothesis,
        rows,
        all_pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactABlock {
    /// 1-based index range `(n_{k-1}, n_k]`.
    pub start: usize,
    pub end: usize,
    pub extracted: Vec<usize>,
    /// `l_k >= c n_k`.
    pub size_claim: bool,
    /// `H(1..n_k) >= n_k b`.
    pub block_hypothesis: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactAFailure {
    pub m1: usize,
    pub m2: usize,
    pub case: u8,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactAReport {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub blocks: Vec<FactABlock>,
    /// Extracted positions `f_m = s_i` (1-based `i`).
    pub f: Vec<usize>,
    pub pairs_checked: u64,
    pub case_counts: [u64; 3],
    pub failures: Vec<FactAFailure>,
    pub hypothesis_met: bool,
}

/// Finite block-entropy argument: extract hereditary subsets of each
/// block `(n_{k-1}, n_k]` of indices and check, for all `m1 <= m2`, the
/// per-case bounds (`b/4`, `b/8`, `bc/8` per position) on the oracle.
///
/// `oracle(I)` is the entropy of the join over the 1-based indices `I`;
/// `h_alpha` is the single-partition entropy.
pub fn verify_fact_a(
    oracle: &dyn Fn(&[usize]) -> f64,
    anchors: &[usize],
    b: f64,
    h_alpha: f64,
) -> Result<FactAReport> {
    if anchors.is_empty() || anchors.len() > 3 {
        return Err(Error::InvalidArgument("one to three blocks are supported".into()));
    }
    if anchors.windows(2).any(|w| w[0] >= w[1]) || anchors[0] == 0 {
        return Err(Error::AnchorSpacing("anchors must be positive and increasing".into()));
    }
    let c = b / (4.0 * (h_alpha + 1.0));
    let d = b * c / 8.0;
    let mut blocks = Vec::new();
    let mut f: Vec<usize> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut prev = 0usize;
    let mut hypothesis_met = true;
    for (k, &n) in anchors.iter().enumerate() {
        let ex = hereditary_extract(prev + 1..n + 1, oracle, b)?;
        let all: Vec<usize> = (1..=n).collect();
        let block_hypothesis = oracle(&all) >= n as f64 * b;
        hypothesis_met &= block_hypothesis && !ex.indices.is_empty();
        blocks.push(FactABlock {
            start: prev + 1,
            end: n,
            size_claim: ex.indices.len() as f64 >= c * n as f64,
            extracted: ex.indices.clone(),
            block_hypothesis,
        });
        owner.extend(std::iter::repeat_n(k, ex.indices.len()));
        f.extend(ex.indices);
        prev = n;
    }
    let mut failures = Vec::new();
    let mut case_counts = [0u64; 3];
    let mut pairs = 0u64;
    for m1 in 1..=f.len() {
        for m2 in m1..=f.len() {
            let (k1, k2) = (owner[m1 - 1], owner[m2 - 1]);
            let case = match k2 - k1 {
                0 => 1u8,
                1 => 2,
                _ => 3,
            };
            let len = (m2 + 1 - m1) as f64;
            let bound = match case {
                1 => b / 4.0 * len,
                2 => b / 8.0 * len,
                _ => d * len,
            };
            let value = oracle(&f[m1 - 1..m2]);
            pairs += 1;
            case_counts[case as usize - 1] += 1;
            if value < bound.max(d * len) - 1e-12 {
                failures.push(FactAFailure { m1, m2, case, value, bound });
            }
        }
    }
    Ok(FactAReport { b, c, d, blocks, f, pairs_checked: pairs, case_counts, failures, hypothesis_met })
}

/// Exact entropy oracle over subsets of `offsets` (1-based indices),
/// memoized.
pub fn tower_oracle<'a>(
    ladder: &'a Ladder,
    idx: usize,
    part: &'a Partition,
    offsets: &'a [u64],
    budget: u64,
) -> impl Fn(&[usize]) -> f64 + 'a {
    let memo: RefCell<HashMap<Vec<usize>, f64>> = RefCell::new(HashMap::new());
    move |set: &[usize]| {
        if set.is_empty() {
            return 0.0;
        }
        if let Some(&v) = memo.borrow().get(set) {
            return v;
        }
        let mut pos: Vec<u64> = set.iter().map(|&i| offsets[i - 1]).collect();
        pos.sort_unstable();
        pos.dedup();
        let v = join_dist_exact(ladder, idx, part, &pos, budget)
            .map(|d| d.shannon(Estimator::PlugIn))
            .unwrap_or(f64::NAN);
        memo.borrow_mut().insert(set.to_vec(), v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{EntropyPoint, Window};
    use crate::entropy::DistMode;

    fn profile(hs: &[f64]) -> EntropyProfile {
        EntropyProfile {
            sequence: "x".into(),
            partition: "p".into(),
            mode: DistMode::Exact,
            window: Window { stage: "W1".into(), height: 10, max_offset: 1, levels: 9 },
            points: hs
                .iter()
                .enumerate()
                .map(|(i, &h)| EntropyPoint {
                    n: i + 1,
                    s_n: i as u64,
                    h,
                    h_per_n: h / (i + 1) as f64,
                    name_count: 2f64.powf(h).ceil() as u64,
                    name_count_lower_bound: false,
                    std_error: 0.0,
                    within_log_bound: true,
                })
                .collect(),
        }
    }

    #[test]
    fn egs_examples() {
        let full: Vec<f64> = (1..=40).map(|n| n as f64).collect();
        assert!(egs_test(&profile(&full), 0.5));
        let flat = vec![1.0; 200];
        assert!(!egs_test(&profile(&flat), 0.1));
        assert!(egs_test(&profile(&flat), 0.0));
        assert!(!egs_test(&profile(&[0.0; 30]), 0.0));
    }

    #[test]
    fn growth_excess_of_full_shift_is_zero_at_tau_one() {
        let p = profile(&(1..=20).map(|n| n as f64).collect::<Vec<_>>());
        assert!(name_growth_excess(&p, 1.0).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn c_of_quarter() {
        assert!((c_of(0.25) - 3f64.log2() / 8.0).abs() < 1e-12);
        assert_eq!(c_of(0.5), 0.0);
    }

    #[test]
    fn fact_a_independence_oracle() {
        let oracle = |s: &[usize]| s.len() as f64;
        let r = verify_fact_a(&oracle, &[4, 12, 30], 1.0, 1.0).unwrap();
        assert!(r.hypothesis_met);
        assert!(r.failures.is_empty());
        assert_eq!(r.d, 1.0 / 8.0 * (1.0 / 8.0));
        assert_eq!(r.f.len(), 30);
        assert!(r.case_counts.iter().all(|&c| c > 0));
        let single = verify_fact_a(&oracle, &[6], 1.0, 1.0).unwrap();
        assert_eq!(single.case_counts, [21, 0, 0]);
    }

    #[test]
    fn fact_a_zero_oracle() {
        let zero = |_: &[usize]| 0.0;
        let r = verify_fact_a(&zero, &[5], 1.0, 1.0).unwrap();
        assert!(!r.hypothesis_met);
        assert!(r.f.is_empty());
    }
}
