//! Verification suites behind `entdim verify`.

use entdim_core::entropy::{independence_check, perturbation_check, Mode, Partition, SampleConfig};
use entdim_core::estimator::verify_lower_bound;
use entdim_core::ratio::{self, Ratio};
use entdim_core::schedule::{ft_sequence, paper_schedule, toy_schedule, InsertionPlan, Schedule, Tau};
use entdim_core::seqdim::{densify, estimate_dims_default, power_merge, reverse_blocks, seq_scale, IntSeq};
use entdim_core::tower::{build, Ladder, Op, StageLabel};
use entdim_core::{Result, SCHEMA_VERSION};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SUITES: [&str; 6] = ["measures", "names", "independence", "lowerbound", "perturbation", "seqcalc"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
}

pub struct Ctx {
    /// User schedule and build depth; built-in toys when absent.
    pub schedule: Option<(Schedule, usize)>,
    pub partition: Option<String>,
    pub samples: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub budget: u64,
}

impl Ctx {
    fn ladders(&self) -> Result<Vec<(String, Schedule, Ladder)>> {
        if let Some((s, d)) = &self.schedule {
            return Ok(vec![("schedule".into(), s.clone(), build(s, *d)?)]);
        }
        let mut out = Vec::new();
        for (e, r, h) in [([2u64, 1, 2], [1u64, 2, 1], Some(3)), ([2, 1, 3], [1, 3, 1], None), ([2, 2, 2], [2, 1, 1], Some(2))] {
            let s = toy_schedule(&e, &r, &[(2, 1, h)], Some(u64::MAX))?;
            out.push((format!("toy e={e:?} r={r:?}"), s.clone(), build(&s, 3)?));
        }
        let s = paper_schedule(Tau::new(1, 2)?, InsertionPlan::Default, 4)?;
        out.push(("paper tau=1/2".into(), s.clone(), build(&s, 4)?));
        Ok(out)
    }

    fn sample_mode(&self, seed: u64) -> Mode {
        let cfg = SampleConfig::new(self.samples, seed);
        Mode::Sample(match self.workers {
            Some(w) => cfg.with_workers(w),
            None => cfg,
        })
    }
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), pass, detail: detail.into() }
}

fn r(x: &Ratio) -> String {
    ratio::to_string(x)
}

pub fn run(suite: &str, ctx: &Ctx) -> Result<VerifyReport> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut suites = Vec::new();
    for name in names {
        let checks = match name {
            "measures" => measures(ctx)?,
            "names" => name_counts(ctx)?,
            "independence" => independence(ctx)?,
            "lowerbound" => lower_bound(ctx)?,
            "perturbation" => perturbation(ctx)?,
            "seqcalc" => seqcalc()?,
            other => return Err(entdim_core::Error::Parse(format!("unknown suite {other:?}"))),
        };
        suites.push(SuiteReport { suite: name.into(), pass: checks.iter().all(|c| c.pass), checks });
    }
    Ok(VerifyReport { schema_version: SCHEMA_VERSION, pass: suites.iter().all(|s| s.pass), suites })
}

fn measures(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (label, s, l) in ctx.ladders()? {
        for (i, t) in l.towers.iter().enumerate() {
            let recomputed = l.recomputed_measure(i);
            let xi = &s.stages[i / 2].xi;
            out.push(check(
                format!("{label} {}: measure", t.label),
                recomputed == t.measure && t.measure == *xi,
                format!("stored {}, recomputed {}, schedule {}", r(&t.measure), r(&recomputed), r(xi)),
            ));
        }
        let untouched = &l.pool.total - &l.pool.consumed - l.pool.remaining();
        let sum = &l.top().measure + l.pool.remaining() + &untouched;
        out.push(check(
            format!("{label}: measure + pool = 1"),
            sum == Ratio::one(),
            format!("{} + {} + {} = {}", r(&l.top().measure), r(&l.pool.remaining()), r(&untouched), r(&sum)),
        ));
        let top = l.len() - 1;
        if l.towers[top].cells_u64().is_some_and(|c| c <= ctx.budget) {
            for ref_idx in 0..top {
                let acc = l.level_set_accounting(top, ref_idx, ctx.budget)?;
                out.push(check(
                    format!("{label}: level sets of {} recovered exactly", l.towers[ref_idx].label),
                    acc.level_sets_exact,
                    format!("spacer mass by event: {:?}", acc.spacer_mass.iter().map(|(t, m)| (*t, r(m))).collect::<Vec<_>>()),
                ));
            }
        }
    }
    Ok(out)
}

fn name_counts(ctx: &Ctx) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (label, _, l) in ctx.ladders()? {
        for (i, t) in l.towers.iter().enumerate() {
            let Op::Ins { e, .. } = t.op else { continue };
            let sp = l.spacer_offsets(i)?;
            out.push(check(
                format!("{label} {}: spacer offsets", t.label),
                sp.within_bound,
                format!("max relative error {} <= {}", r(&sp.max_relative_error), r(&sp.bound)),
            ));
            if !t.cells_u64().is_some_and(|c| c <= ctx.budget) {
                continue;
            }
            let n_out = BigUint::from(l.distinct_names(i, ctx.budget)?);
            let n_in = BigUint::from(l.distinct_names(i - 1, ctx.budget)?);
            let cols = l.towers[i - 1].column_count();
            let (lo, hi) = (n_in.pow(e as u32), cols.pow(e as u32 + 1));
            out.push(check(
                format!("{label} {}: name count bounds", t.label),
                lo <= n_out && n_out <= hi,
                format!("{lo} <= {n_out} <= {hi}"),
            ));
        }
    }
    Ok(out)
}

/// Subsets of `f` with 1..=k elements.
fn subsets(f: &[u64], k: usize) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![vec![]];
    for &x in f {
        let grown: Vec<Vec<u64>> = out.iter().filter(|b| b.len() < k).map(|b| [b.as_slice(), &[x]].concat()).collect();
        out.extend(grown);
    }
    out.retain(|b| !b.is_empty());
    out
}

fn independence(ctx: &Ctx) -> Result<Vec<Check>> {
    let (s, l) = match &ctx.schedule {
        Some((s, d)) => (s.clone(), build(s, *d)?),
        None => {
            let s = toy_schedule(&[2, 3, 8], &[1, 1, 1], &[(2, 1, None)], Some(u64::MAX))?;
            let l = build(&s, 3)?;
            (s, l)
        }
    };
    let ins = s
        .insertion(1)
        .ok_or_else(|| entdim_core::Error::InvalidArgument("the schedule has no insertion".into()))?
        .clone();
    let idx = l.index_of(StageLabel::Base(ins.n + 1))?;
    let f0 = ft_sequence(&s, 1, 0, 12)?.offsets_u64()?;
    let mut out = Vec::new();
    for b in subsets(&f0, 3) {
        let rep = independence_check(&l, idx, ins.n, ins.l, &b, Some(&f0), ctx.budget)?;
        let detail = match rep.violations.first() {
            Some(v) => format!("level sets {:?}: {} > {}", v.level_sets, v.lhs, v.rhs),
            None => format!("{} choices, max ratio {:.4}", rep.choices_checked, rep.max_ratio),
        };
        out.push(check(format!("B = {b:?}"), rep.violations.is_empty(), detail));
    }
    Ok(out)
}

fn lower_bound(ctx: &Ctx) -> Result<Vec<Check>> {
    let (s, l, mode) = match &ctx.schedule {
        Some((s, d)) => (s.clone(), build(s, *d)?, ctx.sample_mode(ctx.seed)),
        None => {
            let s = toy_schedule(&[2, 3, 8], &[1, 4, 1], &[(2, 1, None)], Some(u64::MAX))?;
            let l = build(&s, 3)?;
            (s, l, Mode::Exact { budget: ctx.budget })
        }
    };
    let ins = s
        .insertion(1)
        .ok_or_else(|| entdim_core::Error::InvalidArgument("the schedule has no insertion".into()))?
        .clone();
    let spec = ctx.partition.clone().unwrap_or_else(|| "levels:W1:0,5".into());
    let part = crate::specs::parse_partition(&spec, &l, ctx.budget)?;
    let idx = l.index_of(StageLabel::Base(ins.n + 1))?;
    let h = l.towers[idx].height;
    let f: Vec<u64> = ft_sequence(&s, 1, 0, 64)?.offsets_u64()?.into_iter().filter(|&x| x < h).collect();
    let rep = verify_lower_bound(&l, idx, &part, &f, 8, ins.n, ins.l, mode)?;
    let mut out = vec![check(
        "hypothesis",
        true,
        format!(
            "met: {}; mu(A) = {}, xi_l = {}, smallness {:.4} < c(A) {:.4}: {}",
            rep.hypothesis_met, rep.hypothesis.mu_a, rep.hypothesis.xi_ell, rep.hypothesis.smallness_lhs, rep.c_a,
            rep.hypothesis.smallness_holds
        ),
    )];
    for row in &rep.rows {
        // a failing row only contradicts the lemma when its hypothesis holds
        out.push(check(
            format!("H_{} >= {} c(A)", row.m, row.m),
            row.pass || !rep.hypothesis_met,
            format!("{:.6} vs {:.6} (se {:.2e})", row.h, row.bound, row.std_error),
        ));
    }
    Ok(out)
}

fn perturbation(ctx: &Ctx) -> Result<Vec<Check>> {
    let ladders: Vec<Ladder> = ctx
        .ladders()?
        .into_iter()
        .map(|(_, _, l)| l)
        .filter(|l| l.top().cells_u64().is_some_and(|c| c <= ctx.budget))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut out = Vec::new();
    for k in 0..50 {
        let l = &ladders[k % ladders.len()];
        let top = l.len() - 1;
        let stage = StageLabel::Base(1);
        let cells = l.tower(stage)?.cells_u64().unwrap_or(2) as usize;
        let a = Partition::random_union(l, stage, rng.random_range(1..=cells / 2), rng.random(), ctx.budget)?;
        let b = Partition::random_union(l, stage, rng.random_range(1..=cells / 2), rng.random(), ctx.budget)?;
        let h = l.top().height;
        let mut offs: Vec<u64> = (0..h).collect();
        offs.shuffle(&mut rng);
        offs.truncate(rng.random_range(1..=6usize.min(h as usize)));
        offs.sort_unstable();
        let c = perturbation_check(l, top, &a, &b, &offs, Mode::Exact { budget: ctx.budget })?;
        out.push(check(
            format!("triple {k}: {} / {} at {offs:?}", a.descriptor, b.descriptor),
            c.holds,
            format!(
                "H(beta) {:.6} >= H(alpha) {:.6} - sum {:.6} >= H(alpha) - n max {:.6}",
                c.h_beta, c.h_alpha, c.cond_sum, c.cond_max
            ),
        ));
    }
    Ok(out)
}

fn seqcalc() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let sq = estimate_dims_default(&mut IntSeq::squares(), 100_000)?;
    out.push(check("squares", (0.48..=0.52).contains(&sq.lower) && (0.48..=0.52).contains(&sq.upper), format!("{sq:?}")));
    let nat = estimate_dims_default(&mut IntSeq::naturals(), 10_000)?;
    out.push(check("naturals", nat.lower >= 0.99 && nat.upper <= 1.0, format!("{nat:?}")));
    let p2 = estimate_dims_default(&mut IntSeq::powers_of_two(), 50)?;
    out.push(check("powers of two", p2.upper < 0.2, format!("{p2:?}")));

    let base = IntSeq::squares().with_len(10_000)?;
    for k in [2u64, 5, 10] {
        let mut a = base.clone();
        let mut b = seq_scale(&base, k)?;
        let (da, db) = (estimate_dims_default(&mut a, 10_000)?, estimate_dims_default(&mut b, 10_000)?);
        let s_lo = &base.terms()[10_000 - da.window - 1];
        let bound = (k as f64).ln() / ratio::ln_uint(s_lo);
        let diff = (da.lower - db.lower).abs().max((da.upper - db.upper).abs());
        out.push(check(format!("scale by {k}"), diff <= bound, format!("{diff:.5} <= {bound:.5}")));
    }

    let mut p = IntSeq::powers_of_two().with_len(20)?;
    let anchors = [3usize, 16];
    let f = densify(&mut p, &anchors)?;
    for &nj in &anchors {
        let snj = p.get(nj).cloned().unwrap_or_else(BigUint::zero);
        let count = f.terms().iter().filter(|t| **t <= snj).count();
        out.push(check(format!("densify count at anchor {nj}"), count <= 2 * nj, format!("{count} <= {}", 2 * nj)));
    }

    let one = IntSeq::explicit([1u32])?;
    let merged = power_merge(&one, &ratio::ratio(1, 2), 200)?;
    let all = (1..=200u32).all(|n| merged.terms().contains(&BigUint::from(n * n)));
    out.push(check("power_merge contains squares", all, "n = 1..200"));

    let mut nat = IntSeq::naturals();
    let anchors = [2usize, 7, 25];
    let rb = reverse_blocks(&mut nat, &anchors)?;
    let ok = anchors.iter().all(|&n| rb.get(n) == nat.get(n));
    out.push(check("reverse_blocks keeps anchors", ok, format!("{anchors:?}")));
    Ok(out)
}
