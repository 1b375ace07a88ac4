use serde::{Deserialize, Serialize};

use super::dist::{DistMode, Estimator, PatternDist, Window};
use super::exact::join_dist_exact;
use super::partition::Partition;
use super::sample::{join_dist_sample, SampleConfig};
use crate::tower::Ladder;
use crate::Result;

/// How pattern distributions are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact { budget: u64 },
    Sample(SampleConfig),
}

pub fn join_dist(ladder: &Ladder, idx: usize, part: &Partition, positions: &[u64], mode: Mode) -> Result<PatternDist> {
    match mode {
        Mode::Exact { budget } => join_dist_exact(ladder, idx, part, positions, budget),
        Mode::Sample(cfg) => join_dist_sample(ladder, idx, part, positions, cfg),
    }
}

/// Support size of a distribution; a lower bound in sampling mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameCount {
    pub count: u64,
    pub lower_bound: bool,
}

pub fn name_count(d: &PatternDist) -> NameCount {
    NameCount { count: d.support() as u64, lower_bound: !d.is_exact() }
}

/// `H <= log2(support)`, decided without rounding slack when the
/// distribution is uniform on its support (equality case).
pub fn entropy_within_log_support(d: &PatternDist) -> bool {
    let first = d.counts.values().next();
    if d.counts.values().all(|c| Some(c) == first) {
        return true;
    }
    let h = d.shannon(Estimator::PlugIn);
    h <= (d.support() as f64).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub n: usize,
    pub s_n: u64,
    /// Bits.
    pub h: f64,
    pub h_per_n: f64,
    pub name_count: u64,
    pub name_count_lower_bound: bool,
    /// Delta-method standard error (0 in exact mode).
    pub std_error: f64,
    /// `H_n <= log2(name_count)`, decided exactly in the uniform case.
    pub within_log_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub sequence: String,
    pub partition: String,
    pub mode: DistMode,
    /// Shared by every point: the window of the longest prefix.
    pub window: Window,
    pub points: Vec<EntropyPoint>,
}

/// `H_n = H(v_{i<=n} T^{-s_i} alpha)` for `n = 1..=n_max`, all points read
/// on the window of the full offset prefix so that they are comparable.
pub fn entropy_profile(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    offsets: &[u64],
    n_max: usize,
    mode: Mode,
    label: &str,
) -> Result<EntropyProfile> {
    let n_max = n_max.min(offsets.len());
    let d = join_dist(ladder, idx, part, &offsets[..n_max], mode)?;
    Ok(profile_from_dist(&d, label, &part.descriptor))
}

pub fn profile_from_dist(d: &PatternDist, label: &str, partition: &str) -> EntropyProfile {
    let points = (1..=d.positions.len())
        .map(|n| {
            let m = d.prefix(n);
            let h = m.shannon(Estimator::PlugIn);
            let nc = name_count(&m);
            EntropyPoint {
                n,
                s_n: d.positions[n - 1],
                h,
                h_per_n: h / n as f64,
                name_count: nc.count,
                name_count_lower_bound: nc.lower_bound,
                std_error: m.entropy_std_error(),
                within_log_bound: entropy_within_log_support(&m),
            }
        })
        .collect();
    EntropyProfile {
        sequence: label.to_string(),
        partition: partition.to_string(),
        mode: d.mode.clone(),
        window: d.window.clone(),
        points,
    }
}

impl EntropyProfile {
    /// CSV with columns `n, s_n, H_n, H_n/n, name_count, mode`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "s_n", "H_n", "H_n/n", "name_count", "mode"])?;
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                p.s_n.to_string(),
                format!("{:.12}", p.h),
                format!("{:.12}", p.h_per_n),
                p.name_count.to_string(),
                self.mode.name().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondEntropy {
    /// `H(alpha | beta)` in bits.
    pub alpha_given_beta: f64,
    /// `H(beta | alpha)` in bits.
    pub beta_given_alpha: f64,
}

/// Conditional entropies from the joint single-position distribution on
/// the whole tower.
pub fn cond_entropy(ladder: &Ladder, idx: usize, alpha: &Partition, beta: &Partition, mode: Mode) -> Result<CondEntropy> {
    let joint = join_dist(ladder, idx, &alpha.join(beta)?, &[0], mode)?;
    Ok(cond_from_joint(&joint, alpha.cell_count() as u32, beta.cell_count() as u32, 0))
}

/// Conditional entropies at position `i` of a distribution over
/// `alpha v beta` cells (`a * |beta| + b`).
pub fn cond_from_joint(joint: &PatternDist, na: u32, nb: u32, i: usize) -> CondEntropy {
    let m = joint.marginal(&[i]);
    let hab = m.shannon(Estimator::PlugIn);
    let ha = m.map_cells(|c| c / nb, vec![String::new(); na as usize]).shannon(Estimator::PlugIn);
    let hb = m.map_cells(|c| c % nb, vec![String::new(); nb as usize]).shannon(Estimator::PlugIn);
    CondEntropy { alpha_given_beta: (hab - hb).max(0.0), beta_given_alpha: (hab - ha).max(0.0) }
}

/// Both sides of `H_n(beta) >= H_n(alpha) - sum_i H(alpha_i | beta_i)
/// >= H_n(alpha) - n max_i H(alpha_i | beta_i)`, all read on one window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub n: usize,
    pub h_alpha: f64,
    pub h_beta: f64,
    pub cond_sum: f64,
    pub cond_max: f64,
    pub holds: bool,
}

pub fn perturbation_check(
    ladder: &Ladder,
    idx: usize,
    alpha: &Partition,
    beta: &Partition,
    positions: &[u64],
    mode: Mode,
) -> Result<PerturbationCheck> {
    let (na, nb) = (alpha.cell_count() as u32, beta.cell_count() as u32);
    let joint = join_dist(ladder, idx, &alpha.join(beta)?, positions, mode)?;
    let h_alpha = joint.map_cells(|c| c / nb, alpha.cell_names.clone()).shannon(Estimator::PlugIn);
    let h_beta = joint.map_cells(|c| c % nb, beta.cell_names.clone()).shannon(Estimator::PlugIn);
    let conds: Vec<f64> = (0..positions.len())
        .map(|i| cond_from_joint(&joint, na, nb, i).alpha_given_beta)
        .collect();
    let cond_sum: f64 = conds.iter().sum();
    let cond_max = conds.iter().cloned().fold(0.0, f64::max);
    let n = positions.len();
    // entropies are sums of ~support terms; allow only float rounding
    let eps = 1e-9;
    let holds = h_beta + eps >= h_alpha - cond_sum && h_alpha - cond_sum + eps >= h_alpha - n as f64 * cond_max;
    Ok(PerturbationCheck { n, h_alpha, h_beta, cond_sum, cond_max, holds })
}
