use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dist::{DistMode, Pattern, PatternDist, Window};
use super::exact::check_positions;
use super::partition::Partition;
use crate::tower::{ColumnId, Ladder};
use crate::{Error, Result};

/// Draws are made in fixed-size batches, batch `b` from stream `b` of the
/// seeded generator, so the result does not depend on the worker count.
pub const SAMPLE_BATCH: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl SampleConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        SampleConfig { samples, seed, workers: 0 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        SampleConfig { workers, ..self }
    }
}

fn run_batch(
    ladder: &Ladder,
    idx: usize,
    ref_idx: usize,
    part: &Partition,
    positions: &[u64],
    window: u64,
    seed: u64,
    batch: u64,
    size: u64,
) -> BTreeMap<Pattern, u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let bits = ladder.towers[idx].col_log2;
    let mut out: BTreeMap<Pattern, u64> = BTreeMap::new();
    for _ in 0..size {
        let col = ColumnId::random(bits, &mut rng);
        let j = rng.random_range(0..window);
        let p: Pattern = positions
            .iter()
            .map(|s| part.cell_of(ladder.locate_cell(idx, &col, j + s, ref_idx)))
            .collect();
        *out.entry(p).or_default() += 1;
    }
    out
}

fn merge(mut a: BTreeMap<Pattern, u64>, b: BTreeMap<Pattern, u64>) -> BTreeMap<Pattern, u64> {
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

/// Monte-Carlo pattern distribution: `(column, base level)` uniform over
/// the window, patterns read through lineage resolution.
pub fn join_dist_sample(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    positions: &[u64],
    cfg: SampleConfig,
) -> Result<PatternDist> {
    let tower = &ladder.towers[idx];
    let max = check_positions(positions, tower.height)?;
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("samples must be positive".into()));
    }
    let ref_idx = ladder.index_of(part.ref_stage)?;
    if ref_idx > idx {
        return Err(Error::InvalidArgument("partition stage above tower".into()));
    }
    let window = tower.height - max;
    let batches = cfg.samples.div_ceil(SAMPLE_BATCH);
    let job = || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let size = SAMPLE_BATCH.min(cfg.samples - b * SAMPLE_BATCH);
                run_batch(ladder, idx, ref_idx, part, positions, window, cfg.seed, b, size)
            })
            .reduce(BTreeMap::new, merge)
    };
    let counts = if cfg.workers == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(job)
    };
    Ok(PatternDist {
        positions: positions.to_vec(),
        counts: counts.into_iter().map(|(k, v)| (k, BigUint::from(v))).collect(),
        total: BigUint::from(cfg.samples),
        mode: DistMode::Empirical { samples: cfg.samples, seed: cfg.seed },
        window: Window::new(tower.label, tower.height, max),
        cell_names: part.cell_names.clone(),
    })
}
