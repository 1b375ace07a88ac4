use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ratio::Ratio;
use crate::tower::{Ladder, StageLabel};
use crate::{Error, Result};

/// A finite partition of the tower space read through lineage at a
/// reference stage.
///
/// Every level set `(column, level)` of the reference tower gets a cell;
/// all spacers (whatever their insertion event) share `spacer_cell`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub ref_stage: StageLabel,
    /// Cell of level set `column * h_ref + level`.
    pub labels: Vec<u32>,
    pub spacer_cell: u32,
    pub cell_names: Vec<String>,
    pub descriptor: String,
}

fn ref_cells(ladder: &Ladder, stage: StageLabel, budget: u64) -> Result<u64> {
    let t = ladder.tower(stage)?;
    t.cells_u64().filter(|&c| c <= budget).ok_or_else(|| Error::EnumerationInfeasible {
        what: "reference stage level sets",
        size: format!("2^{} x {}", t.col_log2, t.height),
        budget,
    })
}

impl Partition {
    /// `{P_0, P_1}` read at stage 0, spacers as a third cell `s`.
    pub fn symbol() -> Self {
        Partition {
            ref_stage: StageLabel::Base(0),
            labels: vec![0, 1],
            spacer_cell: 2,
            cell_names: vec!["0".into(), "1".into(), "s".into()],
            descriptor: "symbol".into(),
        }
    }

    /// `{A, A^c}` with `A` the given level sets of the reference stage;
    /// spacers belong to `A^c`. Cell 0 is `A`.
    pub fn level_union(ladder: &Ladder, stage: StageLabel, level_sets: &[u64], budget: u64) -> Result<Self> {
        let n = ref_cells(ladder, stage, budget)?;
        let mut labels = vec![1u32; n as usize];
        for &i in level_sets {
            if i >= n {
                return Err(Error::InvalidArgument(format!("level set {i} outside stage {stage} ({n} level sets)")));
            }
            labels[i as usize] = 0;
        }
        let idx: Vec<String> = level_sets.iter().map(|i| i.to_string()).collect();
        Ok(Partition {
            ref_stage: stage,
            labels,
            spacer_cell: 1,
            cell_names: vec!["A".into(), "Ac".into()],
            descriptor: format!("levels:{stage}:{}", idx.join(",")),
        })
    }

    /// `{A, A^c}` with `A` a uniformly random set of `size` level sets.
    pub fn random_union(ladder: &Ladder, stage: StageLabel, size: usize, seed: u64, budget: u64) -> Result<Self> {
        let n = ref_cells(ladder, stage, budget)? as usize;
        if size == 0 || size > n {
            return Err(Error::InvalidArgument(format!("cannot pick {size} of {n} level sets")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picks: Vec<u64> = sample(&mut rng, n, size).into_iter().map(|i| i as u64).collect();
        picks.sort_unstable();
        let mut p = Self::level_union(ladder, stage, &picks, budget)?;
        p.descriptor = format!("random:{stage}:{size}:{seed}");
        Ok(p)
    }

    /// One cell per level set of the reference stage plus one spacer cell.
    pub fn discrete(ladder: &Ladder, stage: StageLabel, budget: u64) -> Result<Self> {
        let n = ref_cells(ladder, stage, budget)? as u32;
        Ok(Partition {
            ref_stage: stage,
            labels: (0..n).collect(),
            spacer_cell: n,
            cell_names: (0..n).map(|i| i.to_string()).chain(["s".to_string()]).collect(),
            descriptor: format!("discrete:{stage}"),
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cell_names.len()
    }

    /// Common refinement `alpha v beta`; cell `a * |beta| + b`.
    pub fn join(&self, other: &Partition) -> Result<Self> {
        if self.ref_stage != other.ref_stage || self.labels.len() != other.labels.len() {
            return Err(Error::InvalidArgument("joined partitions must share a reference stage".into()));
        }
        let nb = other.cell_count() as u32;
        let labels = self.labels.iter().zip(&other.labels).map(|(a, b)| a * nb + b).collect();
        let mut names = Vec::new();
        for a in &self.cell_names {
            for b in &other.cell_names {
                names.push(format!("{a}|{b}"));
            }
        }
        Ok(Partition {
            ref_stage: self.ref_stage,
            labels,
            spacer_cell: self.spacer_cell * nb + other.spacer_cell,
            cell_names: names,
            descriptor: format!("({})v({})", self.descriptor, other.descriptor),
        })
    }

    /// Level sets assigned to `cell`.
    pub fn level_sets_of(&self, cell: u32) -> BTreeSet<u64> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cell)
            .map(|(i, _)| i as u64)
            .collect()
    }

    /// Exact measure of the level sets in `cell` (spacers excluded).
    pub fn level_measure(&self, ladder: &Ladder, cell: u32) -> Result<Ratio> {
        let w = &ladder.tower(self.ref_stage)?.column_width;
        let k = self.labels.iter().filter(|&&c| c == cell).count() as u64;
        Ok(w * Ratio::from_integer(k.into()))
    }

    pub(crate) fn cell_of(&self, located: Option<u64>) -> u32 {
        match located {
            Some(i) => self.labels[i as usize],
            None => self.spacer_cell,
        }
    }
}
