use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ratio::{self, Ratio};
use crate::tower::StageLabel;
use crate::SCHEMA_VERSION;

/// Cell labels read at each position, in position order.
pub type Pattern = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DistMode {
    Exact,
    Empirical { samples: u64, seed: u64 },
}

impl DistMode {
    pub fn name(&self) -> &'static str {
        match self {
            DistMode::Exact => "exact",
            DistMode::Empirical { .. } => "sample",
        }
    }
}

/// Base levels `j` with `j + max_offset < height` of tower `stage`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub stage: String,
    pub height: u64,
    pub max_offset: u64,
    pub levels: u64,
}

impl Window {
    pub fn new(stage: StageLabel, height: u64, max_offset: u64) -> Self {
        Window { stage: stage.to_string(), height, max_offset, levels: height - max_offset }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    PlugIn,
    MillerMadow,
}

/// Distribution of `(n, alpha)`-patterns along a position set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternDist {
    pub positions: Vec<u64>,
    pub counts: BTreeMap<Pattern, BigUint>,
    pub total: BigUint,
    pub mode: DistMode,
    pub window: Window,
    pub cell_names: Vec<String>,
}

impl PatternDist {
    pub fn support(&self) -> usize {
        self.counts.len()
    }

    pub fn is_exact(&self) -> bool {
        self.mode == DistMode::Exact
    }

    pub fn prob(&self, pattern: &[u32]) -> Ratio {
        match self.counts.get(pattern) {
            Some(c) => Ratio::new(c.clone().into(), self.total.clone().into()),
            None => Ratio::zero(),
        }
    }

    /// Probabilities as `f64`, in pattern order.
    pub fn probs_f64(&self) -> Vec<f64> {
        let shift = self.total.bits().saturating_sub(64);
        let t = (&self.total >> shift).to_f64().expect("finite");
        self.counts
            .values()
            .map(|c| (c >> shift).to_f64().expect("finite") / t)
            .collect()
    }

    /// Shannon entropy in bits.
    pub fn shannon(&self, est: Estimator) -> f64 {
        let h = entropy_bits(&self.probs_f64());
        match (est, &self.mode) {
            (Estimator::MillerMadow, DistMode::Empirical { samples, .. }) => {
                h + (self.support() as f64 - 1.0) / (2.0 * *samples as f64 * std::f64::consts::LN_2)
            }
            _ => h,
        }
    }

    /// Delta-method standard error of the plug-in entropy (empirical
    /// mode; 0 for exact distributions).
    pub fn entropy_std_error(&self) -> f64 {
        let DistMode::Empirical { samples, .. } = self.mode else {
            return 0.0;
        };
        let p = self.probs_f64();
        let h = entropy_bits(&p);
        let m2: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2() * x.log2()).sum();
        ((m2 - h * h).max(0.0) / samples as f64).sqrt()
    }

    /// Distribution of the sub-pattern at the given position indices.
    pub fn marginal(&self, idx: &[usize]) -> PatternDist {
        let mut counts: BTreeMap<Pattern, BigUint> = BTreeMap::new();
        for (p, c) in &self.counts {
            let q: Pattern = idx.iter().map(|&i| p[i]).collect();
            *counts.entry(q).or_default() += c;
        }
        PatternDist {
            positions: idx.iter().map(|&i| self.positions[i]).collect(),
            counts,
            total: self.total.clone(),
            mode: self.mode.clone(),
            window: self.window.clone(),
            cell_names: self.cell_names.clone(),
        }
    }

    /// First `n` positions.
    pub fn prefix(&self, n: usize) -> PatternDist {
        self.marginal(&(0..n).collect::<Vec<_>>())
    }

    /// Relabel cells through `f`, merging patterns that collide.
    pub fn map_cells(&self, f: impl Fn(u32) -> u32, names: Vec<String>) -> PatternDist {
        let mut counts: BTreeMap<Pattern, BigUint> = BTreeMap::new();
        for (p, c) in &self.counts {
            *counts.entry(p.iter().map(|&x| f(x)).collect()).or_default() += c;
        }
        PatternDist { counts, cell_names: names, ..self.clone() }
    }

    pub fn total_variation(&self, other: &PatternDist) -> f64 {
        let pa: BTreeMap<&Pattern, f64> = self.counts.keys().zip(self.probs_f64()).collect();
        let pb: BTreeMap<&Pattern, f64> = other.counts.keys().zip(other.probs_f64()).collect();
        let mut keys: Vec<&Pattern> = pa.keys().chain(pb.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|k| (pa.get(k).unwrap_or(&0.0) - pb.get(k).unwrap_or(&0.0)).abs())
            .sum::<f64>()
    }

    /// `Σ p = 1` as an exact rational identity.
    pub fn is_normalized(&self) -> bool {
        self.counts.values().fold(BigUint::zero(), |a, b| a + b) == self.total
    }

    pub fn pattern_string(&self, p: &[u32]) -> String {
        let all_single = self.cell_names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<&str> = p.iter().map(|&c| self.cell_names[c as usize].as_str()).collect();
        if all_single {
            parts.concat()
        } else {
            parts.join(".")
        }
    }

    pub fn to_doc(&self) -> DistDoc {
        let patterns = self
            .counts
            .iter()
            .map(|(p, c)| {
                let v = match self.mode {
                    DistMode::Exact => ratio::to_string(&Ratio::new(c.clone().into(), self.total.clone().into())),
                    DistMode::Empirical { .. } => c.to_string(),
                };
                (self.pattern_string(p), v)
            })
            .collect();
        DistDoc {
            schema_version: SCHEMA_VERSION,
            positions: self.positions.clone(),
            mode: self.mode.clone(),
            window: self.window.clone(),
            cells: self.cell_names.clone(),
            patterns,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistDoc {
    pub schema_version: u32,
    pub positions: Vec<u64>,
    #[serde(flatten)]
    pub mode: DistMode,
    pub window: Window,
    pub cells: Vec<String>,
    /// Pattern to exact probability `"p/q"` or to sample count.
    pub patterns: BTreeMap<String, String>,
}

pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Product distribution of two independent systems (patterns paired
/// cellwise, cell `a * |cells_b| + b`).
pub fn product(a: &PatternDist, b: &PatternDist) -> PatternDist {
    assert_eq!(a.positions.len(), b.positions.len(), "product needs equal position counts");
    let nb = b.cell_names.len() as u32;
    let mut counts = BTreeMap::new();
    for (pa, ca) in &a.counts {
        for (pb, cb) in &b.counts {
            let p: Pattern = pa.iter().zip(pb).map(|(x, y)| x * nb + y).collect();
            counts.insert(p, ca * cb);
        }
    }
    let mut names = Vec::new();
    for x in &a.cell_names {
        for y in &b.cell_names {
            names.push(format!("{x}|{y}"));
        }
    }
    let mode = match (&a.mode, &b.mode) {
        (DistMode::Exact, DistMode::Exact) => DistMode::Exact,
        (m, _) => m.clone(),
    };
    PatternDist {
        positions: a.positions.clone(),
        counts,
        total: &a.total * &b.total,
        mode,
        window: a.window.clone(),
        cell_names: names,
    }
}
