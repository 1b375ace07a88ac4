//! Exact pattern distributions.
//!
//! Columns of a tower are tuples of parent columns, so the pattern read at a
//! fixed set of levels factors over the segments the levels fall in. The
//! engine below computes, for a tower and a level set, the joint count of
//! (pattern, column index mod `m`) over all columns, recursing through the
//! ladder. The residue is what couples neighbouring segments of an
//! insertion tower: segment `k`'s spacer offset is a function of digit
//! `k + 1` modulo `h*`.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::dist::{DistMode, Pattern, PatternDist, Window};
use super::partition::Partition;
use crate::tower::{residue_counts, ColumnId, Ladder, Op};
use crate::{Error, Result};

type Joint = HashMap<(Pattern, u64), BigUint>;

struct Engine<'a> {
    ladder: &'a Ladder,
    part: &'a Partition,
    ref_idx: usize,
    memo: HashMap<(usize, Vec<u64>, u64), Rc<Joint>>,
}

fn pow2_mod(exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result: u128 = 1;
    let mut base: u128 = 2 % m as u128;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    result as u64
}

fn uniform_residues(bits: u64, m: u64) -> Joint {
    residue_counts(bits, m)
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(r, c)| ((Vec::new(), r as u64), c))
        .collect()
}

impl<'a> Engine<'a> {
    fn joint(&mut self, idx: usize, levels: &[u64], m: u64) -> Rc<Joint> {
        let key = (idx, levels.to_vec(), m);
        if let Some(j) = self.memo.get(&key) {
            return j.clone();
        }
        let out = Rc::new(self.compute(idx, levels, m));
        self.memo.insert(key, out.clone());
        out
    }

    fn compute(&mut self, idx: usize, levels: &[u64], m: u64) -> Joint {
        let tower = &self.ladder.towers[idx];
        if levels.is_empty() {
            return uniform_residues(tower.col_log2, m);
        }
        if idx == self.ref_idx {
            let h = tower.height;
            let mut out = Joint::new();
            for c in 0..tower.column_count_u64().expect("reference stage is enumerable") {
                let p: Pattern = levels.iter().map(|&l| self.part.labels[(c * h + l) as usize]).collect();
                *out.entry((p, c % m)).or_default() += 1u32;
            }
            return out;
        }
        let parent = &self.ladder.towers[idx - 1];
        let (hp, ep) = (parent.height, parent.col_log2);
        match tower.op {
            Op::Initial => unreachable!("stage 0 is always a reference stage"),
            Op::Rep { .. } => {
                let mapped: Vec<u64> = levels.iter().map(|l| l % hp).collect();
                let mut uniq = mapped.clone();
                uniq.sort_unstable();
                uniq.dedup();
                let pos: Vec<usize> = mapped.iter().map(|x| uniq.binary_search(x).unwrap()).collect();
                let sub = self.joint(idx - 1, &uniq, m);
                let mut out = Joint::new();
                for ((p, r), c) in sub.iter() {
                    let q: Pattern = pos.iter().map(|&i| p[i]).collect();
                    *out.entry((q, *r)).or_default() += c;
                }
                out
            }
            Op::Ind { e } => {
                let mut by_seg: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
                for &l in levels {
                    by_seg.entry(l / hp).or_default().push(l % hp);
                }
                let mut state: Joint = [((Vec::new(), 0u64), BigUint::one())].into_iter().collect();
                if m == 1 {
                    for locals in by_seg.values() {
                        let sub = self.joint(idx - 1, locals, 1);
                        state = combine(&state, &sub, 0, 1);
                    }
                    let untouched = e - by_seg.len() as u64;
                    let factor = BigUint::one() << (ep * untouched);
                    for v in state.values_mut() {
                        *v *= &factor;
                    }
                    return state;
                }
                for k in 0..e {
                    let sub = match by_seg.get(&k) {
                        Some(locals) => self.joint(idx - 1, locals, m),
                        None => self.joint(idx - 1, &[], m),
                    };
                    state = combine(&state, &sub, pow2_mod(ep * k, m), m);
                }
                state
            }
            Op::Ins { e, h_star, .. } => self.ins_joint(idx, levels, m, e, h_star, hp, ep),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn ins_joint(&mut self, idx: usize, levels: &[u64], m: u64, e: u64, h_star: u64, hp: u64, ep: u64) -> Joint {
        let w = hp + h_star;
        let mm = m.lcm(&h_star);
        let spacer = self.part.spacer_cell;
        let mut by_seg: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &l in levels {
            by_seg.entry(l / w).or_default().push(l % w);
        }
        // state: (pattern of segments >= k, residue mod m, digit_k mod h*)
        let mut state: HashMap<(Pattern, u64, u64), BigUint> = HashMap::new();
        for ((_, r), c) in self.joint(idx - 1, &[], mm).iter() {
            let acc = (r % m) * pow2_mod(ep * e, m) % m;
            *state.entry((Vec::new(), acc, r % h_star)).or_default() += c;
        }
        for k in (0..e).rev() {
            let weight = pow2_mod(ep * k, m);
            let locals = by_seg.get(&k).cloned().unwrap_or_default();
            let mut next: HashMap<(Pattern, u64, u64), BigUint> = HashMap::new();
            let mut by_rho: BTreeMap<u64, Vec<(&(Pattern, u64, u64), &BigUint)>> = BTreeMap::new();
            for entry in state.iter() {
                by_rho.entry(entry.0 .2).or_default().push(entry);
            }
            for (rho, entries) in by_rho {
                let ell = (rho + 1) % h_star;
                // positions in this segment that read the parent column
                let mut parent_levels = Vec::new();
                let mut slots = Vec::with_capacity(locals.len());
                for &q in &locals {
                    if q < ell || q >= ell + hp {
                        slots.push(None);
                    } else {
                        slots.push(Some(parent_levels.len()));
                        parent_levels.push(q - ell);
                    }
                }
                let sub = self.joint(idx - 1, &parent_levels, mm);
                for ((sp, r), sc) in sub.iter() {
                    let seg: Pattern = slots.iter().map(|s| s.map_or(spacer, |i| sp[i])).collect();
                    let add = (r % m) * weight % m;
                    for ((p, acc, _), c) in &entries {
                        let mut full = seg.clone();
                        full.extend_from_slice(p);
                        *next.entry((full, (acc + add) % m, r % h_star)).or_default() += sc * *c;
                    }
                }
            }
            state = next;
        }
        let mut out = Joint::new();
        for ((p, acc, _), c) in state {
            *out.entry((p, acc)).or_default() += c;
        }
        out
    }
}

/// Product of independent joints: patterns concatenated (`sub` after
/// `state`), residues added with weight.
fn combine(state: &Joint, sub: &Joint, weight: u64, m: u64) -> Joint {
    let mut out = Joint::new();
    for ((p, a), c) in state {
        for ((q, r), d) in sub {
            let mut pat = p.clone();
            pat.extend_from_slice(q);
            *out.entry((pat, (a + r * weight) % m)).or_default() += c * d;
        }
    }
    out
}

pub(crate) fn check_positions(positions: &[u64], height: u64) -> Result<u64> {
    if positions.is_empty() {
        return Err(Error::InvalidArgument("at least one position is required".into()));
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("positions must be strictly increasing".into()));
    }
    let max = *positions.last().expect("nonempty");
    if max >= height {
        return Err(Error::TowerTooShallow { max_offset: max, height });
    }
    Ok(max)
}

fn ref_index(ladder: &Ladder, idx: usize, part: &Partition) -> Result<usize> {
    let r = ladder.index_of(part.ref_stage)?;
    if r > idx {
        return Err(Error::InvalidArgument(format!(
            "partition stage {} is above tower {}",
            part.ref_stage, ladder.towers[idx].label
        )));
    }
    Ok(r)
}

/// Exact distribution over the window `j + max(positions) < h` of tower
/// `idx`, all columns weighted equally. `budget` bounds the work
/// (window levels times reference level sets).
pub fn join_dist_exact(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    positions: &[u64],
    budget: u64,
) -> Result<PatternDist> {
    let tower = &ladder.towers[idx];
    let max = check_positions(positions, tower.height)?;
    let ref_idx = ref_index(ladder, idx, part)?;
    let window = tower.height - max;
    let work = (window as u128) * (part.labels.len() as u128);
    if work > budget as u128 {
        return Err(Error::EnumerationInfeasible {
            what: "exact pattern distribution (use sampling mode)",
            size: work.to_string(),
            budget,
        });
    }
    let mut engine = Engine { ladder, part, ref_idx, memo: HashMap::new() };
    let mut counts: BTreeMap<Pattern, BigUint> = BTreeMap::new();
    for j in 0..window {
        let levels: Vec<u64> = positions.iter().map(|s| s + j).collect();
        for ((p, _), c) in engine.joint(idx, &levels, 1).iter() {
            *counts.entry(p.clone()).or_default() += c;
        }
        if engine.memo.len() > 200_000 {
            engine.memo.clear();
        }
    }
    Ok(PatternDist {
        positions: positions.to_vec(),
        counts,
        total: tower.column_count() * window,
        mode: DistMode::Exact,
        window: Window::new(tower.label, tower.height, max),
        cell_names: part.cell_names.clone(),
    })
}

/// Reference implementation: resolve every (column, base level) of the
/// window. Needs `columns x height <= budget`.
pub fn join_dist_bruteforce(
    ladder: &Ladder,
    idx: usize,
    part: &Partition,
    positions: &[u64],
    budget: u64,
) -> Result<PatternDist> {
    let tower = &ladder.towers[idx];
    let max = check_positions(positions, tower.height)?;
    let ref_idx = ref_index(ladder, idx, part)?;
    let c = tower.cells_u64().filter(|&x| x <= budget).and(tower.column_count_u64()).ok_or_else(|| {
        Error::EnumerationInfeasible {
            what: "brute-force enumeration",
            size: format!("2^{} x {}", tower.col_log2, tower.height),
            budget,
        }
    })?;
    let window = tower.height - max;
    let mut counts: BTreeMap<Pattern, BigUint> = BTreeMap::new();
    for col in 0..c {
        let id = ColumnId::from(col);
        for j in 0..window {
            let p: Pattern = positions
                .iter()
                .map(|s| part.cell_of(ladder.locate_cell(idx, &id, j + s, ref_idx)))
                .collect();
            *counts.entry(p).or_default() += 1u32;
        }
    }
    Ok(PatternDist {
        positions: positions.to_vec(),
        counts,
        total: BigUint::from(c) * window,
        mode: DistMode::Exact,
        window: Window::new(tower.label, tower.height, max),
        cell_names: part.cell_names.clone(),
    })
}
