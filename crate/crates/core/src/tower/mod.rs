//! Cutting-and-stacking towers.
//!
//! A [`Ladder`] holds the towers `W_0, W~_0, W_1, W~_1, ...` produced by the
//! three stacking operations. Columns are never stored: each tower keeps
//! only its height, its column count `2^col_log2`, the exact column width
//! and the operation that produced it. [`Ladder::resolve`] inverts the
//! recursive column structure in `O(number of steps)`.

mod column;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use column::ColumnId;

use crate::ratio::{self, Ratio};
use crate::schedule::Schedule;
use crate::{Error, Result, SCHEMA_VERSION};

/// Ladder position of a tower: `W_n` or `W~_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StageLabel {
    Base(usize),
    Tilde(usize),
}

impl StageLabel {
    /// Position in the alternating ladder (`W_n -> 2n`, `W~_n -> 2n + 1`).
    pub fn ordinal(self) -> usize {
        match self {
            StageLabel::Base(n) => 2 * n,
            StageLabel::Tilde(n) => 2 * n + 1,
        }
    }

    pub fn from_ordinal(i: usize) -> Self {
        if i % 2 == 0 {
            StageLabel::Base(i / 2)
        } else {
            StageLabel::Tilde(i / 2)
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad stage label {s:?} (expected W3 or W~3)"));
        let rest = s.strip_prefix('W').or_else(|| s.strip_prefix('w')).ok_or_else(bad)?;
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        match rest.strip_prefix('~') {
            Some(n) => Ok(StageLabel::Tilde(n.trim_start_matches('_').parse().map_err(|_| bad())?)),
            None => Ok(StageLabel::Base(rest.parse().map_err(|_| bad())?)),
        }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageLabel::Base(n) => write!(f, "W{n}"),
            StageLabel::Tilde(n) => write!(f, "W~{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Initial,
    Ind { e: u64 },
    Rep { r: u64 },
    /// `t` identifies the insertion event for spacer lineage.
    Ins { e: u64, h_star: u64, t: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    pub label: StageLabel,
    pub height: u64,
    /// `column_count = 2^col_log2`.
    pub col_log2: u64,
    pub column_width: Ratio,
    pub measure: Ratio,
    pub op: Op,
}

impl Tower {
    pub fn column_count(&self) -> BigUint {
        BigUint::one() << self.col_log2
    }

    /// Column count when it fits in `u64`.
    pub fn column_count_u64(&self) -> Option<u64> {
        (self.col_log2 < 64).then(|| 1u64 << self.col_log2)
    }

    /// `column_count * height` when it fits in `u64`.
    pub fn cells_u64(&self) -> Option<u64> {
        self.column_count_u64()?.checked_mul(self.height)
    }
}

fn mul_checked(a: u64, b: u64, what: &str) -> Result<u64> {
    a.checked_mul(b)
        .ok_or_else(|| Error::InvalidArgument(format!("{what} exceeds 64 bits")))
}

/// `W_0 = {P_0, P_1}`: two height-1 columns of width `xi / 2`.
pub fn initial_tower(xi: &Ratio) -> Result<Tower> {
    if !(xi > &Ratio::zero() && xi <= &Ratio::one()) {
        return Err(Error::InvalidArgument(format!("xi = {} outside (0, 1]", ratio::to_string(xi))));
    }
    Ok(Tower {
        label: StageLabel::Base(0),
        height: 1,
        col_log2: 1,
        column_width: xi / Ratio::from_integer(2.into()),
        measure: xi.clone(),
        op: Op::Initial,
    })
}

/// `Ind(W, e)`: all `c^e` ordered stackings of `e` columns.
pub fn ind(w: &Tower, e: u64) -> Result<Tower> {
    if e == 0 {
        return Err(Error::InvalidArgument("e must be >= 1".into()));
    }
    let col_log2 = mul_checked(w.col_log2, e, "column exponent")?;
    // old total width c * width, split into e * c^e pieces
    let scale = Ratio::from_integer((BigUint::from(e) << (col_log2 - w.col_log2)).into());
    let label = match w.label {
        StageLabel::Tilde(n) | StageLabel::Base(n) => StageLabel::Base(n + 1),
    };
    Ok(Tower {
        label,
        height: mul_checked(w.height, e, "height")?,
        col_log2,
        column_width: &w.column_width / scale,
        measure: w.measure.clone(),
        op: Op::Ind { e },
    })
}

/// `Rep(W, r)`: each column cut into `r` equal pieces stacked on itself.
pub fn rep(w: &Tower, r: u64) -> Result<Tower> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be >= 1".into()));
    }
    let label = match w.label {
        StageLabel::Base(n) | StageLabel::Tilde(n) => StageLabel::Tilde(n),
    };
    Ok(Tower {
        label,
        height: mul_checked(w.height, r, "height")?,
        col_log2: w.col_log2,
        column_width: &w.column_width / Ratio::from_integer(r.into()),
        measure: w.measure.clone(),
        op: Op::Rep { r },
    })
}

/// Spacer reservoir `P_s = [xi, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacerPool {
    pub total: Ratio,
    pub consumed: Ratio,
}

impl SpacerPool {
    pub fn new(xi: &Ratio) -> Self {
        SpacerPool { total: Ratio::one() - xi, consumed: Ratio::zero() }
    }

    pub fn remaining(&self) -> Ratio {
        &self.total - &self.consumed
    }

    pub fn draw(&mut self, amount: &Ratio) -> Result<()> {
        let after = &self.consumed + amount;
        if after > self.total {
            return Err(Error::SpacerPoolOverdrawn {
                needed: ratio::to_string(amount),
                available: ratio::to_string(&self.remaining()),
            });
        }
        self.consumed = after;
        Ok(())
    }
}

/// `Ins(W, e, h*)`: `c^(e+1)` columns; segment `k` of column
/// `(i_1, ..., i_{e+1})` is column `i_k` of `W` with `l = i_{k+1} mod h*`
/// spacers below it and `h* - l` above (indices 1-based).
pub fn ins(w: &Tower, e: u64, h_star: u64, t: usize, pool: &mut SpacerPool) -> Result<Tower> {
    if e == 0 || h_star == 0 {
        return Err(Error::InvalidArgument("e and h* must be >= 1".into()));
    }
    let spacer_mass = &w.measure * Ratio::new(h_star.into(), w.height.into());
    pool.draw(&spacer_mass)?;
    let col_log2 = mul_checked(w.col_log2, e + 1, "column exponent")?;
    let seg = w
        .height
        .checked_add(h_star)
        .ok_or_else(|| Error::InvalidArgument("height exceeds 64 bits".into()))?;
    let scale = Ratio::from_integer((BigUint::from(e) << (col_log2 - w.col_log2)).into());
    let label = match w.label {
        StageLabel::Tilde(n) | StageLabel::Base(n) => StageLabel::Base(n + 1),
    };
    Ok(Tower {
        label,
        height: mul_checked(e, seg, "height")?,
        col_log2,
        column_width: &w.column_width / scale,
        measure: &w.measure + spacer_mass,
        op: Op::Ins { e, h_star, t },
    })
}

/// Identity of a level of a deep tower at an earlier reference stage.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineageTag {
    Level { stage: StageLabel, column: ColumnId, level: u64 },
    /// Spacer inserted by event `t` in segment `segment` at offset
    /// `position` within that segment.
    Spacer { t: usize, segment: u64, position: u64 },
}

impl LineageTag {
    /// Symbol at stage 0: `'0'`, `'1'` or `'s'`.
    pub fn symbol(&self) -> char {
        match self {
            LineageTag::Spacer { .. } => 's',
            LineageTag::Level { column, .. } => {
                if column.to_u64() == Some(0) {
                    '0'
                } else {
                    '1'
                }
            }
        }
    }
}

/// The alternating tower ladder with its spacer pool.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub towers: Vec<Tower>,
    pub pool: SpacerPool,
    pub xi: Ratio,
}

impl Ladder {
    pub fn new(xi: &Ratio) -> Result<Self> {
        Ok(Ladder { towers: vec![initial_tower(xi)?], pool: SpacerPool::new(xi), xi: xi.clone() })
    }

    pub fn top(&self) -> &Tower {
        self.towers.last().expect("ladder is never empty")
    }

    pub fn len(&self) -> usize {
        self.towers.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: StageLabel) -> Result<usize> {
        self.towers
            .iter()
            .position(|t| t.label == label)
            .ok_or_else(|| Error::InvalidArgument(format!("ladder has no tower {label}")))
    }

    pub fn tower(&self, label: StageLabel) -> Result<&Tower> {
        Ok(&self.towers[self.index_of(label)?])
    }

    pub fn push_ind(&mut self, e: u64) -> Result<&Tower> {
        let t = ind(self.top(), e)?;
        self.towers.push(t);
        Ok(self.top())
    }

    pub fn push_rep(&mut self, r: u64) -> Result<&Tower> {
        let t = rep(self.top(), r)?;
        self.towers.push(t);
        Ok(self.top())
    }

    pub fn push_ins(&mut self, e: u64, h_star: u64, t: usize) -> Result<&Tower> {
        let top = self.towers.last().expect("ladder is never empty");
        let w = ins(top, e, h_star, t, &mut self.pool)?;
        self.towers.push(w);
        Ok(self.top())
    }

    /// Map `(col, level)` of tower `idx` to its lineage at tower `ref_idx`.
    pub fn resolve(&self, idx: usize, col: &ColumnId, level: u64, ref_idx: usize) -> Result<LineageTag> {
        let tower = self
            .towers
            .get(idx)
            .ok_or_else(|| Error::InvalidLineage(format!("no tower at index {idx}")))?;
        if ref_idx > idx {
            return Err(Error::InvalidArgument("reference stage above the tower".into()));
        }
        if level >= tower.height {
            return Err(Error::InvalidLineage(format!("level {level} >= height {}", tower.height)));
        }
        if col.bits() > tower.col_log2 {
            return Err(Error::InvalidLineage(format!("column {col} >= 2^{}", tower.col_log2)));
        }
        Ok(self.resolve_unchecked(idx, col.clone(), level, ref_idx))
    }

    pub(crate) fn resolve_unchecked(&self, idx: usize, col: ColumnId, level: u64, ref_idx: usize) -> LineageTag {
        let (mut col, mut level) = (col, level);
        let mut i = idx;
        while i > ref_idx {
            let parent = &self.towers[i - 1];
            let h = parent.height;
            match self.towers[i].op {
                Op::Initial => unreachable!("initial tower has no parent"),
                Op::Rep { .. } => level %= h,
                Op::Ind { .. } => {
                    let seg = level / h;
                    level %= h;
                    col = col.digit(seg, parent.col_log2);
                }
                Op::Ins { h_star, t, .. } => {
                    let w = h + h_star;
                    let seg = level / w;
                    let q = level % w;
                    let ell = (col.digit(seg + 1, parent.col_log2).rem_u64(h_star) + 1) % h_star;
                    if q < ell || q >= ell + h {
                        return LineageTag::Spacer { t, segment: seg, position: q };
                    }
                    level = q - ell;
                    col = col.digit(seg, parent.col_log2);
                }
            }
            i -= 1;
        }
        LineageTag::Level { stage: self.towers[ref_idx].label, column: col, level }
    }

    /// Cell index `col * h_ref + level` of a reference-stage level, or
    /// `None` for a spacer. The reference tower must have `c h < 2^64`.
    pub(crate) fn locate_cell(&self, idx: usize, col: &ColumnId, level: u64, ref_idx: usize) -> Option<u64> {
        match self.resolve_unchecked(idx, col.clone(), level, ref_idx) {
            LineageTag::Spacer { .. } => None,
            LineageTag::Level { column, level, .. } => {
                Some(column.to_u64().expect("reference column fits u64") * self.towers[ref_idx].height + level)
            }
        }
    }

    /// Name of a column: its word over `{0, 1, s}`, base level first.
    pub fn name_of(&self, idx: usize, col: &ColumnId, budget: u64) -> Result<String> {
        let h = self.towers[idx].height;
        if h > budget {
            return Err(Error::EnumerationInfeasible { what: "name length", size: h.to_string(), budget });
        }
        (0..h).map(|l| self.resolve(idx, col, l, 0).map(|t| t.symbol())).collect()
    }

    /// Names of all columns in index order.
    pub fn name_table(&self, idx: usize, budget: u64) -> Result<Vec<String>> {
        let t = &self.towers[idx];
        let cells = t.cells_u64().filter(|&c| c <= budget).ok_or_else(|| Error::EnumerationInfeasible {
            what: "name table",
            size: format!("2^{} x {}", t.col_log2, t.height),
            budget,
        })?;
        let _ = cells;
        let c = t.column_count_u64().expect("bounded above");
        (0..c).map(|i| self.name_of(idx, &ColumnId::from(i), budget)).collect()
    }

    /// Number of distinct column names.
    pub fn distinct_names(&self, idx: usize, budget: u64) -> Result<u64> {
        let names: HashSet<String> = self.name_table(idx, budget)?.into_iter().collect();
        Ok(names.len() as u64)
    }

    pub fn sample_column<R: Rng + ?Sized>(&self, idx: usize, rng: &mut R) -> ColumnId {
        ColumnId::random(self.towers[idx].col_log2, rng)
    }

    /// `count` uniform column ids from a fixed seed.
    pub fn sample_columns_seeded(&self, idx: usize, seed: u64, count: usize) -> Vec<ColumnId> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_column(idx, &mut rng)).collect()
    }

    /// Total measure of tower `idx` recomputed from the column data.
    pub fn recomputed_measure(&self, idx: usize) -> Ratio {
        let t = &self.towers[idx];
        &t.column_width * Ratio::from_integer((t.column_count() * t.height).into())
    }

    /// Exact measure of every reference level set, summed over the columns
    /// and levels of tower `idx` that resolve to it (enumeration).
    pub fn level_set_accounting(&self, idx: usize, ref_idx: usize, budget: u64) -> Result<LevelAccounting> {
        let t = &self.towers[idx];
        let r = &self.towers[ref_idx];
        let cells = t.cells_u64().filter(|&c| c <= budget).ok_or_else(|| Error::EnumerationInfeasible {
            what: "level accounting",
            size: format!("2^{} x {}", t.col_log2, t.height),
            budget,
        })?;
        let _ = cells;
        let ref_cells = r.cells_u64().expect("reference smaller than tower") as usize;
        let mut hits = vec![0u64; ref_cells];
        let mut spacer_hits: BTreeMap<usize, u64> = BTreeMap::new();
        for c in 0..t.column_count_u64().expect("bounded") {
            let col = ColumnId::from(c);
            for l in 0..t.height {
                match self.resolve_unchecked(idx, col.clone(), l, ref_idx) {
                    LineageTag::Level { column, level, .. } => {
                        hits[(column.to_u64().expect("small") * r.height + level) as usize] += 1;
                    }
                    LineageTag::Spacer { t, .. } => *spacer_hits.entry(t).or_default() += 1,
                }
            }
        }
        let w = &t.column_width;
        let exact = hits.iter().all(|&k| w * Ratio::from_integer(k.into()) == r.column_width);
        let spacer_mass = spacer_hits
            .iter()
            .map(|(&ev, &k)| (ev, w * Ratio::from_integer(k.into())))
            .collect();
        Ok(LevelAccounting { level_sets_exact: exact, spacer_mass })
    }

    /// Exact frequency of each spacer offset `l` over the columns of an
    /// `Ins` tower, with the `h*/c` relative error bound for the parent.
    pub fn spacer_offsets(&self, idx: usize) -> Result<SpacerOffsetReport> {
        let Op::Ins { h_star, .. } = self.towers[idx].op else {
            return Err(Error::InvalidArgument(format!("{} is not an insertion tower", self.towers[idx].label)));
        };
        let parent = &self.towers[idx - 1];
        let c = parent.column_count();
        let counts = residue_counts(parent.col_log2, h_star);
        // digit d gives offset (d + 1) mod h*
        let mut freq = vec![Ratio::zero(); h_star as usize];
        for (rsd, k) in counts.iter().enumerate() {
            let ell = (rsd as u64 + 1) % h_star;
            freq[ell as usize] = Ratio::new(k.clone().into(), c.clone().into());
        }
        let target = ratio::ratio(1, h_star);
        let max_rel = freq
            .iter()
            .map(|f| {
                let d = (f - &target) / &target;
                if d < Ratio::zero() {
                    -d
                } else {
                    d
                }
            })
            .max()
            .unwrap_or_else(Ratio::zero);
        let bound = Ratio::new(h_star.into(), c.into());
        Ok(SpacerOffsetReport { within_bound: max_rel <= bound, frequencies: freq, max_relative_error: max_rel, bound })
    }
}

/// Number of `x` in `[0, 2^bits)` with `x = r (mod m)`, for each `r < m`.
pub fn residue_counts(bits: u64, m: u64) -> Vec<BigUint> {
    let c = BigUint::one() << bits;
    let q = &c / m;
    let rem = (&c % m).to_u64().expect("below m");
    (0..m).map(|r| if r < rem { &q + 1u32 } else { q.clone() }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelAccounting {
    /// Each reference level set is recovered with exactly its width.
    pub level_sets_exact: bool,
    pub spacer_mass: BTreeMap<usize, Ratio>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacerOffsetReport {
    pub frequencies: Vec<Ratio>,
    pub max_relative_error: Ratio,
    pub bound: Ratio,
    pub within_bound: bool,
}

/// Towers `W_0, W~_0, ..., W_depth, W~_depth` for a schedule.
pub fn build(s: &Schedule, depth: usize) -> Result<Ladder> {
    build_with_xi(s, depth, &s.xi)
}

/// [`build`] starting from a given base measure instead of the schedule's
/// `xi`. Too large a value overdraws the spacer pool.
pub fn build_with_xi(s: &Schedule, depth: usize, xi: &Ratio) -> Result<Ladder> {
    if depth > s.depth() {
        return Err(Error::InvalidArgument(format!(
            "build depth {depth} exceeds schedule depth {}",
            s.depth()
        )));
    }
    let small = |x: &BigUint, what: &str| {
        x.to_u64().ok_or_else(|| Error::InvalidArgument(format!("{what} exceeds 64 bits")))
    };
    let mut ladder = Ladder::new(xi)?;
    let own_xi = *xi == s.xi;
    for n in 0..=depth {
        let st = &s.stages[n];
        if n > 0 {
            let prev = &s.stages[n - 1];
            let e = small(prev.e.as_ref().expect("e below depth"), "e")?;
            match prev.insertion.and_then(|t| s.insertion(t)) {
                Some(i) => {
                    let hs = small(&s.h_star(i), "h*")?;
                    ladder.push_ins(e, hs, i.t)?;
                }
                None => {
                    ladder.push_ind(e)?;
                }
            }
        }
        if n == 0 {
            // W~_0 = W_0
            ladder.push_rep(1)?;
        } else {
            ladder.push_rep(small(&st.r, "r")?)?;
        }
        debug_assert!(!own_xi || ladder.towers[2 * n].measure == st.xi);
        debug_assert_eq!(BigUint::from(ladder.towers[2 * n].height), st.h);
    }
    Ok(ladder)
}

/// Check every ladder tower against the schedule's heights, counts and
/// measure ladder; returns the list of mismatches.
pub fn check_against_schedule(l: &Ladder, s: &Schedule) -> Vec<String> {
    let mut out = Vec::new();
    for t in &l.towers {
        let (n, tilde) = match t.label {
            StageLabel::Base(n) => (n, false),
            StageLabel::Tilde(n) => (n, true),
        };
        let st = &s.stages[n];
        let h = if tilde { &st.h_tilde } else { &st.h };
        if BigUint::from(t.height) != *h {
            out.push(format!("{}: height {} != {}", t.label, t.height, h));
        }
        if BigUint::from(t.col_log2) != st.c_log2 {
            out.push(format!("{}: column exponent {} != {}", t.label, t.col_log2, st.c_log2));
        }
        if t.measure != st.xi {
            out.push(format!(
                "{}: measure {} != xi {}",
                t.label,
                ratio::to_string(&t.measure),
                ratio::to_string(&st.xi)
            ));
        }
    }
    out
}

/// Towers are isomorphic when their name multisets agree (widths are
/// equal within each tower, hence always proportional).
pub fn isomorphic(a: &Ladder, ia: usize, b: &Ladder, ib: usize, budget: u64) -> Result<bool> {
    let mut na = a.name_table(ia, budget)?;
    let mut nb = b.name_table(ib, budget)?;
    na.sort();
    nb.sort();
    Ok(na == nb)
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub stage: String,
    pub height: u64,
    pub column_count: String,
    pub column_count_log2: u64,
    pub column_width: String,
    pub measure: String,
    #[serde(flatten)]
    pub op: Op,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderDoc {
    pub schema_version: u32,
    pub xi: String,
    pub ins_convention: String,
    pub spacer_pool: PoolDoc,
    pub towers: Vec<TowerDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolDoc {
    pub total: String,
    pub consumed: String,
}

pub const INS_CONVENTION: &str =
    "segment k of column (i_1..i_{e+1}) is column i_k with l = i_{k+1} mod h* spacers below, indices 1-based";

impl Ladder {
    /// Ladder document; name tables included for towers whose
    /// `columns x height` fits `names_budget`.
    pub fn to_doc(&self, names_budget: Option<u64>) -> Result<LadderDoc> {
        let mut towers = Vec::new();
        for (i, t) in self.towers.iter().enumerate() {
            let names = match names_budget {
                Some(b) if t.cells_u64().is_some_and(|c| c <= b) => Some(self.name_table(i, b)?),
                _ => None,
            };
            towers.push(TowerDoc {
                stage: t.label.to_string(),
                height: t.height,
                column_count: if t.col_log2 <= 4096 {
                    t.column_count().to_string()
                } else {
                    format!("2^{}", t.col_log2)
                },
                column_count_log2: t.col_log2,
                column_width: ratio::to_string(&t.column_width),
                measure: ratio::to_string(&t.measure),
                op: t.op.clone(),
                names,
            });
        }
        Ok(LadderDoc {
            schema_version: SCHEMA_VERSION,
            xi: ratio::to_string(&self.xi),
            ins_convention: INS_CONVENTION.to_string(),
            spacer_pool: PoolDoc {
                total: ratio::to_string(&self.pool.total),
                consumed: ratio::to_string(&self.pool.consumed),
            },
            towers,
        })
    }

    /// Rebuild a ladder from its document by replaying the operations.
    pub fn from_doc(doc: &LadderDoc) -> Result<Self> {
        let xi = ratio::parse(&doc.xi)?;
        let mut l = Ladder::new(&xi)?;
        for t in doc.towers.iter().skip(1) {
            match t.op {
                Op::Initial => return Err(Error::Parse("initial op inside ladder".into())),
                Op::Ind { e } => l.push_ind(e)?,
                Op::Rep { r } => l.push_rep(r)?,
                Op::Ins { e, h_star, t } => l.push_ins(e, h_star, t)?,
            };
        }
        for (a, b) in l.towers.iter().zip(&doc.towers) {
            if a.height != b.height || ratio::to_string(&a.measure) != b.measure || a.label.to_string() != b.stage {
                return Err(Error::Parse(format!("ladder document inconsistent at {}", b.stage)));
            }
        }
        Ok(l)
    }
}
