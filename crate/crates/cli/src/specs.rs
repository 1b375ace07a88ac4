//! Mini-languages for sequences, partitions and tower references.

use std::fs;
use std::path::Path;

use entdim_core::entropy::Partition;
use entdim_core::schedule::{ft_dims_symbolic, ft_sequence, Schedule, SymbolicDims};
use entdim_core::seqdim::{Generator, IntSeq};
use entdim_core::tower::{Ladder, LadderDoc, StageLabel};
use entdim_core::{ratio, Error, Result};
use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Most terms materialized for an `ft:` sequence.
pub const FT_MAX_TERMS: usize = 1_000_000;

pub struct SeqSpec {
    pub label: String,
    pub seq: IntSeq,
    /// Closed-form estimate over the whole finite sumset, for `ft:` only.
    pub symbolic: Option<SymbolicDims>,
    /// Offsets to read entropy at; `F^t` keeps its leading 0.
    pub offsets: Vec<u64>,
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    Schedule::from_json(&fs::read_to_string(path)?)
}

/// `squares`, `nat`, `pow2`, `floorpow:<1/tau>`, `arith:<a>,<d>`,
/// `file:<path>`, `ft:<schedule.json>:<t>`. Lazy sequences are extended to
/// `n` terms.
pub fn parse_seq(spec: &str, n: usize) -> Result<SeqSpec> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let lazy = |g: Generator| -> Result<IntSeq> { IntSeq::lazy(g)?.with_len(n) };
    let mut symbolic = None;
    let mut offsets = None;
    let seq = match (head, rest) {
        ("squares", "") => lazy(Generator::Squares)?,
        ("nat", "") => lazy(Generator::Naturals)?,
        ("pow2", "") => lazy(Generator::Powers { base: 2 })?,
        ("floorpow", r) if !r.is_empty() => {
            let e = ratio::parse(r)?;
            let (num, den) = (e.numer().to_u32(), e.denom().to_u32());
            match (num, den) {
                (Some(num), Some(den)) => lazy(Generator::FloorPower { num, den })?,
                _ => return Err(Error::Parse(format!("exponent {r} too large"))),
            }
        }
        ("arith", r) => {
            let (a, d) = r.split_once(',').ok_or_else(|| Error::Parse(format!("arith needs <a>,<d>: {spec}")))?;
            let p = |x: &str| x.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {x:?}")));
            lazy(Generator::Arithmetic { a: p(a)?, d: p(d)? })?
        }
        ("file", r) if !r.is_empty() => {
            let text = fs::read_to_string(r)?;
            let terms = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| l.parse::<BigUint>().map_err(|_| Error::Parse(format!("bad term {l:?} in {r}"))))
                .collect::<Result<Vec<_>>>()?;
            IntSeq::explicit(terms)?
        }
        ("ft", r) => {
            let (path, t) = r.rsplit_once(':').ok_or_else(|| Error::Parse(format!("ft needs <schedule>:<t>: {spec}")))?;
            let t: usize = t.parse().map_err(|_| Error::Parse(format!("bad insertion index {t:?}")))?;
            let s = load_schedule(Path::new(path))?;
            let base = s.insertion(t).ok_or_else(|| Error::InvalidArgument(format!("schedule has no insertion t = {t}")))?.n;
            let k_max = s.depth().checked_sub(base + 1).ok_or_else(|| Error::InvalidArgument("schedule too shallow for F^t".into()))?;
            let ft = ft_sequence(&s, t, k_max, n.clamp(1, FT_MAX_TERMS) + 1)?;
            // the symbolic estimate needs at least 20 terms
            symbolic = ft_dims_symbolic(&s, t, k_max, None, 1e-9).ok();
            offsets = Some(ft.offsets.iter().map_while(|o| o.to_u64()).collect());
            ft.to_intseq(&format!("{path}:{t}"))?
        }
        _ => return Err(Error::Parse(format!("unknown sequence spec {spec:?}"))),
    };
    let offsets = match offsets {
        Some(o) => o,
        None => seq.terms().iter().map_while(|x| x.to_u64()).collect(),
    };
    Ok(SeqSpec { label: spec.to_string(), seq, symbolic, offsets })
}

/// `symbol`, `discrete:<stage>`, `levels:<stage>:<i,j,..>`,
/// `random:<stage>:<size>:<seed>`.
pub fn parse_partition(spec: &str, ladder: &Ladder, budget: u64) -> Result<Partition> {
    let parts: Vec<&str> = spec.split(':').collect();
    let stage = |s: &str| StageLabel::parse(s);
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {s:?} in {spec:?}")));
    match parts.as_slice() {
        ["symbol"] => Ok(Partition::symbol()),
        ["discrete", st] => Partition::discrete(ladder, stage(st)?, budget),
        ["levels", st, list] => {
            let levels = list.split(',').map(int).collect::<Result<Vec<_>>>()?;
            Partition::level_union(ladder, stage(st)?, &levels, budget)
        }
        ["random", st, size, seed] => Partition::random_union(ladder, stage(st)?, int(size)? as usize, int(seed)?, budget),
        _ => Err(Error::Parse(format!("unknown partition spec {spec:?}"))),
    }
}

/// `<ladder.json>[@<stage>]`; the stage defaults to the last tower.
pub fn load_tower(spec: &str) -> Result<(Ladder, usize)> {
    let (path, stage) = match spec.rsplit_once('@') {
        Some((p, s)) => (p, Some(s)),
        None => (spec, None),
    };
    let doc: LadderDoc = serde_json::from_str(&fs::read_to_string(path)?)?;
    let ladder = Ladder::from_doc(&doc)?;
    let idx = match stage {
        Some(s) => ladder.index_of(StageLabel::parse(s)?)?,
        None => ladder.len() - 1,
    };
    Ok((ladder, idx))
}
