//! The integer parameter schedule of the cutting-and-stacking construction.
//!
//! For a target dimension `tau = p/q` the schedule fixes
//! `r_n = C n^2` (with `C` the least integer such that `C^(tau/(1-tau)) > 2`),
//! `e_0 = 2`, `h_0 = w_0 = 1`, `h_1 = e_0`, and for `n >= 1`
//!
//! ```text
//! h~_n = h_n r_n
//! w_n  = h~_n            (no insertion at n)
//!      = h~_n + h_{l_t}  (n = n_t)
//! e_n  = floor((w_n^tau / (e_0 ... e_{n-1}))^(1/(1-tau)))
//! h_{n+1} = w_n e_n
//! ```
//!
//! Everything is exact big-integer arithmetic. Column counts are always
//! powers of two and are stored through their base-2 exponent.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ratio::{self, from_uint, Ratio};
use crate::seqdim::{Generator, IntSeq};
use crate::{Error, Result, DEFAULT_BUDGET, SCHEMA_VERSION};

/// Rational target dimension `p/q` in lowest terms with `0 < p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tau {
    p: u32,
    q: u32,
}

impl Tau {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidArgument(format!("tau = {p}/{q} must lie in (0, 1)")));
        }
        let g = p.gcd(&q);
        Ok(Tau { p: p / g, q: q / g })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let r = ratio::parse(s)?;
        match (r.numer().to_u32(), r.denom().to_u32()) {
            (Some(p), Some(q)) => Tau::new(p, q),
            _ => Err(Error::Parse(format!("tau {s:?} is not a small positive fraction"))),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn as_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn as_ratio(&self) -> Ratio {
        ratio::ratio(self.p as u64, self.q as u64)
    }

    /// Least integer `C` with `C^(p/(q-p)) > 2`, i.e. `C^p > 2^(q-p)`.
    pub fn c_tau(&self) -> u64 {
        let bound = BigUint::one() << (self.q - self.p);
        let mut c = 1u64;
        while BigUint::from(c).pow(self.p) <= bound {
            c += 1;
        }
        c
    }
}

impl std::fmt::Display for Tau {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// One spacer insertion: step `n_t + 1` is `Ins(W~_{n_t}, e_{n_t}, h*)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub t: usize,
    pub n: usize,
    pub l: usize,
    /// Spacer run length; `h_{l_t}` when absent.
    pub h_star: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InsertionPlan {
    /// `n_t = 3t`, `l_t = 3t - 1`.
    Default,
    Explicit(Vec<(usize, usize)>),
}

impl InsertionPlan {
    fn pairs_up_to(&self, max_n: usize) -> Vec<(usize, usize)> {
        match self {
            InsertionPlan::Default => (1..).map(|t| (3 * t, 3 * t - 1)).take_while(|&(n, _)| n <= max_n).collect(),
            InsertionPlan::Explicit(v) => v.iter().copied().filter(|&(n, _)| n <= max_n).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleKind {
    Paper { tau: Tau, c_tau: u64, plan: InsertionPlan },
    Toy { e: Vec<u64>, r: Vec<u64>, insertions: Vec<(usize, usize, Option<u64>)> },
}

/// Parameters of stage `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageParams {
    pub n: usize,
    /// Stacking multiplicity of step `n + 1`; absent on the last toy stage.
    pub e: Option<BigUint>,
    pub r: BigUint,
    pub h: BigUint,
    pub h_tilde: BigUint,
    pub w: BigUint,
    /// `c_n = 2^c_log2`.
    pub c_log2: BigUint,
    /// Measure of `W_n` (and `W~_n`).
    pub xi: Ratio,
    /// Index `t` if step `n + 1` inserts spacers.
    pub insertion: Option<usize>,
    /// `e_n` was raised to the floor value 2 (only ever at `n = 1`).
    pub floored: bool,
}

impl StageParams {
    pub fn e_u64(&self) -> Option<u64> {
        self.e.as_ref().and_then(|e| e.to_u64())
    }

    /// `c_n` as an integer when it has at most `max_bits` bits.
    pub fn column_count(&self, max_bits: u64) -> Option<BigUint> {
        let bits = self.c_log2.to_u64()?;
        (bits < max_bits).then(|| BigUint::one() << bits)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub stages: Vec<StageParams>,
    pub insertions: Vec<Insertion>,
    /// Truncated product `xi = prod_t (1 + h*_t / h~_{n_t})^-1` over the
    /// insertions performed within the schedule depth.
    pub xi: Ratio,
    /// Certified bound on `sum 1/r_{n_t}` over insertions beyond the depth.
    pub xi_tail_bound: Ratio,
}

fn floor_div_iroot(num: &BigUint, den: &BigUint, m: u32) -> BigUint {
    // floor((num / den)^(1/m))
    (num / den).nth_root(m)
}

impl Schedule {
    pub fn depth(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn tau(&self) -> Option<Tau> {
        match &self.kind {
            ScheduleKind::Paper { tau, .. } => Some(*tau),
            ScheduleKind::Toy { .. } => None,
        }
    }

    pub fn stage(&self, n: usize) -> Option<&StageParams> {
        self.stages.get(n)
    }

    pub fn insertion(&self, t: usize) -> Option<&Insertion> {
        self.insertions.iter().find(|i| i.t == t)
    }

    /// Spacer run length of insertion `t`.
    pub fn h_star(&self, ins: &Insertion) -> BigUint {
        match ins.h_star {
            Some(h) => BigUint::from(h),
            None => self.stages[ins.l].h.clone(),
        }
    }

    /// `e_0 e_1 ... e_{n-1}`.
    pub fn e_product(&self, n: usize) -> BigUint {
        self.stages[..n]
            .iter()
            .map(|s| s.e.clone().expect("e defined below depth"))
            .product()
    }
}

fn validate_plan(pairs: &[(usize, usize)]) -> Result<()> {
    let mut prev_n = 0usize;
    let mut prev_l = 0usize;
    for (i, &(n, l)) in pairs.iter().enumerate() {
        if l == 0 || l >= n || (i > 0 && (n <= prev_n || l <= prev_l)) || (i > 0 && l <= prev_n) {
            return Err(Error::InvalidArgument(format!(
                "insertion ({n}, {l}) breaks l_1 < n_1 < l_2 < n_2 < ..."
            )));
        }
        prev_n = n;
        prev_l = l;
    }
    Ok(())
}

/// Shared recursion: heights, counts and the measure ladder from given
/// `e`, `r` and insertion data.
fn assemble(
    kind: ScheduleKind,
    e: Vec<Option<BigUint>>,
    r: Vec<BigUint>,
    floored: Vec<bool>,
    ins_pairs: &[(usize, usize, Option<u64>)],
    tail_bound: Ratio,
) -> Result<Schedule> {
    let depth = r.len() - 1;
    let insertions: Vec<Insertion> = ins_pairs
        .iter()
        .enumerate()
        .map(|(i, &(n, l, h_star))| Insertion { t: i + 1, n, l, h_star })
        .collect();
    let mut stages: Vec<StageParams> = Vec::with_capacity(depth + 1);
    let mut h = BigUint::one();
    let mut c_log2 = BigUint::one();
    for n in 0..=depth {
        let h_tilde = &h * &r[n];
        let ins = insertions.iter().find(|i| i.n == n);
        let w = match ins {
            Some(i) => {
                let hs = match i.h_star {
                    Some(v) => BigUint::from(v),
                    None => stages[i.l].h.clone(),
                };
                &h_tilde + hs
            }
            None => h_tilde.clone(),
        };
        stages.push(StageParams {
            n,
            e: e[n].clone(),
            r: r[n].clone(),
            h: h.clone(),
            h_tilde,
            w: w.clone(),
            c_log2: c_log2.clone(),
            xi: Ratio::zero(),
            insertion: ins.map(|i| i.t),
            floored: floored[n],
        });
        if let Some(en) = &e[n] {
            h = &w * en;
            c_log2 = &c_log2 * (en + if ins.is_some() { 1u32 } else { 0 });
        }
    }
    // measure ladder: xi_{n+1} = xi_n * w_n / h~_n
    let mut growth = Ratio::one();
    for s in &stages[..depth] {
        if s.e.is_some() && s.insertion.is_some() {
            growth *= Ratio::new(s.w.clone().into(), s.h_tilde.clone().into());
        }
    }
    let xi = Ratio::one() / &growth;
    let mut cur = xi.clone();
    for n in 0..=depth {
        stages[n].xi = cur.clone();
        if stages[n].insertion.is_some() && stages[n].e.is_some() && n < depth {
            cur = &cur * Ratio::new(stages[n].w.clone().into(), stages[n].h_tilde.clone().into());
        }
    }
    Ok(Schedule { kind, stages, insertions, xi, xi_tail_bound: tail_bound })
}

/// The construction's schedule for `tau` up to stage `depth`.
///
/// `e_n` is the exact integer floor of `(w_n^p / P^q)^(1/(q-p))` with
/// `P = e_0 ... e_{n-1}`, certified by `e^(q-p) P^q <= w^p < (e+1)^(q-p) P^q`.
/// At `n = 1` the formula can yield 1 (the lower bound `e_n >= 2` has no
/// base case because `e_0 = 2` is fixed rather than derived); the value is
/// raised to 2 and flagged. Any `e_n < 2` at `n >= 2` is a degeneracy.
pub fn paper_schedule(tau: Tau, plan: InsertionPlan, depth: usize) -> Result<Schedule> {
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    let pairs = plan.pairs_up_to(depth);
    validate_plan(&pairs)?;
    let c = tau.c_tau();
    let (p, q) = (tau.p, tau.q);
    let m = q - p;

    let mut e: Vec<Option<BigUint>> = vec![Some(BigUint::from(2u32))];
    let mut r: Vec<BigUint> = vec![BigUint::one()];
    let mut floored = vec![false];
    let mut h = BigUint::from(2u32); // h_1 = e_0
    let mut heights = vec![BigUint::one()];
    let mut prod = BigUint::from(2u32);
    for n in 1..=depth {
        heights.push(h.clone());
        let rn = BigUint::from(c) * (n as u64) * (n as u64);
        let h_tilde = &h * &rn;
        let w = match pairs.iter().find(|&&(nt, _)| nt == n) {
            Some(&(_, l)) => &h_tilde + &heights[l],
            None => h_tilde,
        };
        let num = w.pow(p);
        let den = prod.pow(q);
        let mut en = floor_div_iroot(&num, &den, m);
        // certificate of the floor
        debug_assert!(en.pow(m) * &den <= num && (&en + 1u32).pow(m) * &den > num);
        let mut was_floored = false;
        if en < BigUint::from(2u32) {
            if n == 1 {
                en = BigUint::from(2u32);
                was_floored = true;
            } else {
                return Err(Error::ScheduleDegeneracy { stage: n, value: en.to_string() });
            }
        }
        prod *= &en;
        h = &w * &en;
        e.push(Some(en));
        r.push(rn);
        floored.push(was_floored);
    }
    let ins: Vec<(usize, usize, Option<u64>)> =
        pairs.iter().map(|&(n, l)| (n, l, None)).collect();
    // insertions strictly below depth are performed; n_t = depth is not
    let performed = ins.iter().filter(|(n, _, _)| *n < depth).count();
    let tail = tail_bound(&plan, c, depth, performed);
    let kind = ScheduleKind::Paper { tau, c_tau: c, plan };
    assemble(kind, e, r, floored, &ins, tail)
}

/// Bound on `sum_{t > T} 1 / r_{n_t}` over insertions not performed within
/// `depth`.
fn tail_bound(plan: &InsertionPlan, c: u64, depth: usize, performed: usize) -> Ratio {
    match plan {
        InsertionPlan::Default => {
            // sum_{t>T} 1/(9 C t^2) < 1/(9 C T), and < 2/(9C) when T = 0
            let t = performed as u64;
            if t == 0 {
                ratio::ratio(2, 9 * c)
            } else {
                ratio::ratio(1, 9 * c * t)
            }
        }
        InsertionPlan::Explicit(v) => v
            .iter()
            .filter(|&&(n, _)| n >= depth)
            .map(|&(n, _)| ratio::ratio(1, c * (n as u64) * (n as u64)))
            .fold(Ratio::zero(), |a, b| a + b),
    }
}

/// User-supplied schedule: `e = [e_0..e_{d-1}]`, `r = [r_1..r_d]`,
/// insertions `(n_t, l_t, h*)`. Stage 0 has `r_0 = 1`. The final column
/// count must fit `budget` (default [`DEFAULT_BUDGET`]; `u64::MAX` turns
/// the check off, for towers only read through the structural engine).
pub fn toy_schedule(
    e: &[u64],
    r: &[u64],
    insertions: &[(usize, usize, Option<u64>)],
    budget: Option<u64>,
) -> Result<Schedule> {
    if e.is_empty() || e.len() != r.len() {
        return Err(Error::InvalidArgument("toy schedule needs len(e) = len(r) >= 1".into()));
    }
    if e.iter().chain(r).any(|&x| x == 0) {
        return Err(Error::InvalidArgument("toy e_n, r_n must be >= 1".into()));
    }
    let depth = e.len();
    let pairs: Vec<(usize, usize)> = insertions.iter().map(|&(n, l, _)| (n, l)).collect();
    validate_plan(&pairs)?;
    if let Some(&(n, _)) = pairs.iter().find(|&&(n, _)| n >= depth) {
        return Err(Error::InvalidArgument(format!("insertion at n = {n} beyond toy depth {depth}")));
    }
    let mut ev: Vec<Option<BigUint>> = e.iter().map(|&x| Some(BigUint::from(x))).collect();
    ev.push(None);
    let mut rv = vec![BigUint::one()];
    rv.extend(r.iter().map(|&x| BigUint::from(x)));
    let kind = ScheduleKind::Toy {
        e: e.to_vec(),
        r: r.to_vec(),
        insertions: insertions.to_vec(),
    };
    let s = assemble(kind, ev, rv, vec![false; depth + 1], insertions, Ratio::zero())?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let last = s.stages.last().expect("nonempty");
    let fits = budget == u64::MAX
        || last
        .column_count(64)
        .and_then(|c| c.to_u64())
        .is_some_and(|c| c <= budget);
    if !fits {
        return Err(Error::EnumerationInfeasible {
            what: "toy column count",
            size: format!("2^{}", last.c_log2),
            budget,
        });
    }
    Ok(s)
}

/// Per-stage result of the schedule condition checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub n: usize,
    /// `w_n >= (e_0 ... e_{n-1})^(1/tau)`, checked as `w_n^p >= P^q`.
    pub condition3: bool,
    /// `(e_0...e_n / (w_n e_n)^tau)^q` as an exact fraction.
    pub condition1_ratio_pow_q: Option<String>,
    pub condition1_ratio: Option<f64>,
    /// Recursion identities (`h~ = h r`, `h_{n+1} = w e`, count law).
    pub recursions: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub tau: String,
    pub stages: Vec<StageCheck>,
    pub violations: Vec<String>,
}

/// Exact check of the growth condition and recursion identities, plus the
/// finite trend of the normalising ratio. Violations are listed, not fatal.
pub fn validate_conditions(s: &Schedule, tau: Option<Tau>) -> Result<ConditionReport> {
    let tau = tau
        .or_else(|| s.tau())
        .ok_or_else(|| Error::InvalidArgument("a tau is required for toy schedules".into()))?;
    let (p, q) = (tau.p, tau.q);
    let mut checks = Vec::new();
    let mut violations = Vec::new();
    let mut prod = BigUint::one();
    for (n, st) in s.stages.iter().enumerate() {
        let recursions = recursion_holds(s, n);
        if !recursions {
            violations.push(format!("recursion identity fails at n = {n}"));
        }
        if n == 0 {
            prod *= st.e.clone().unwrap_or_else(BigUint::one);
            checks.push(StageCheck {
                n,
                condition3: true,
                condition1_ratio_pow_q: None,
                condition1_ratio: None,
                recursions,
            });
            continue;
        }
        let condition3 = st.w.pow(p) >= prod.pow(q);
        if !condition3 {
            violations.push(format!("condition w_n >= (e_0..e_(n-1))^(1/tau) fails at n = {n}"));
        }
        let (exact, float) = match &st.e {
            Some(en) => {
                let pn = &prod * en;
                let we = &st.w * en;
                let r = Ratio::new(pn.pow(q).into(), we.pow(p).into());
                let lnr = (ratio::ln_uint(&pn) * q as f64 - ratio::ln_uint(&we) * p as f64) / q as f64;
                prod = pn;
                (Some(ratio::to_string(&r)), Some(lnr.exp()))
            }
            None => (None, None),
        };
        checks.push(StageCheck {
            n,
            condition3,
            condition1_ratio_pow_q: exact,
            condition1_ratio: float,
            recursions,
        });
    }
    Ok(ConditionReport { tau: tau.to_string(), stages: checks, violations })
}

fn recursion_holds(s: &Schedule, n: usize) -> bool {
    let st = &s.stages[n];
    let mut ok = st.h_tilde == &st.h * &st.r;
    let ins = st.insertion.and_then(|t| s.insertion(t));
    ok &= match ins {
        Some(i) => st.w == &st.h_tilde + s.h_star(i),
        None => st.w == st.h_tilde,
    };
    if n == 0 {
        ok &= st.h.is_one() && st.c_log2.is_one();
    }
    if let (Some(next), Some(en)) = (s.stages.get(n + 1), &st.e) {
        ok &= next.h == &st.w * en;
        let factor = if ins.is_some() { en + 1u32 } else { en.clone() };
        ok &= next.c_log2 == &st.c_log2 * factor;
        let growth = if ins.is_some() {
            Ratio::one() + Ratio::new(s.h_star(ins.unwrap()).into(), st.h_tilde.clone().into())
        } else {
            Ratio::one()
        };
        ok &= next.xi == &st.xi * growth;
    }
    ok
}

/// Exact truncated `xi` with its certified tail bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiValue {
    pub xi: Ratio,
    pub tail_bound: Ratio,
}

pub fn xi_of(s: &Schedule) -> XiValue {
    XiValue { xi: s.xi.clone(), tail_bound: s.xi_tail_bound.clone() }
}

/// Sumset offsets `F_k^t` (sorted, starting at 0) for `k = 0..=k_max`,
/// truncated to the first `max_terms` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FtSequence {
    pub t: usize,
    pub offsets: Vec<BigUint>,
    /// `|F_k^t| = e_{n_t} ... e_{n_t + k}` for each block `k`.
    pub block_sizes: Vec<BigUint>,
    pub truncated: bool,
}

impl FtSequence {
    /// Positive elements as a 1-based [`IntSeq`] (the offset 0 is dropped).
    pub fn to_intseq(&self, label: &str) -> Result<IntSeq> {
        IntSeq::from_terms(
            self.offsets.iter().filter(|x| !x.is_zero()).cloned().collect(),
            Generator::Ft { schedule: label.to_string(), t: self.t },
        )
    }

    pub fn offsets_u64(&self) -> Result<Vec<u64>> {
        self.offsets
            .iter()
            .map(|o| o.to_u64().ok_or_else(|| Error::InvalidArgument("offset exceeds u64".into())))
            .collect()
    }
}

pub fn ft_sequence(s: &Schedule, t: usize, k_max: usize, max_terms: usize) -> Result<FtSequence> {
    let ins = s
        .insertion(t)
        .ok_or_else(|| Error::InvalidArgument(format!("schedule has no insertion t = {t}")))?;
    let base = ins.n;
    if base + k_max > s.depth() {
        return Err(Error::InvalidArgument(format!(
            "F^{t} needs stage {} but schedule depth is {}",
            base + k_max,
            s.depth()
        )));
    }
    let mut offsets: Vec<BigUint> = vec![BigUint::zero()];
    let mut block_sizes = Vec::with_capacity(k_max + 1);
    let mut size = BigUint::one();
    let mut span = BigUint::zero(); // max element of F_{k-1}
    let mut truncated = false;
    for k in 0..=k_max {
        let st = &s.stages[base + k];
        let e = st
            .e
            .clone()
            .ok_or_else(|| Error::InvalidArgument(format!("e_{} undefined", base + k)))?;
        if k > 0 && span >= st.w {
            return Err(Error::SumsetCollision { block: k });
        }
        size *= &e;
        block_sizes.push(size.clone());
        span += (&e - 1u32) * &st.w;
        if truncated {
            continue;
        }
        let prev_len = offsets.len();
        let mut a = BigUint::one();
        'outer: while a < e {
            let shift = &a * &st.w;
            for i in 0..prev_len {
                if offsets.len() >= max_terms {
                    break 'outer;
                }
                offsets.push(&shift + &offsets[i]);
            }
            a += 1u32;
        }
        if offsets.len() >= max_terms && BigUint::from(offsets.len()) < size {
            truncated = true;
        }
    }
    if !truncated {
        assert_eq!(BigUint::from(offsets.len()), size, "|F_k^t| must equal the e-product");
    }
    debug_assert!(offsets.windows(2).all(|w| w[0] < w[1]));
    Ok(FtSequence { t, offsets, block_sizes, truncated })
}

/// `F^t` without enumeration: `s_n` is the element whose mixed-radix
/// digits (radices `e_{n_t + k}`) spell `n`.
#[derive(Clone, Debug)]
pub struct FtSymbolic {
    radices: Vec<BigUint>,
    places: Vec<BigUint>,
}

impl FtSymbolic {
    pub fn new(s: &Schedule, t: usize, k_max: usize) -> Result<Self> {
        // the enumerated prefix performs the collision checks
        let ft = ft_sequence(s, t, k_max, 1)?;
        let base = s.insertion(t).expect("checked by ft_sequence").n;
        let radices = (0..=k_max).map(|k| s.stages[base + k].e.clone().expect("checked")).collect();
        let places = (0..=k_max).map(|k| s.stages[base + k].w.clone()).collect();
        debug_assert_eq!(ft.block_sizes.len(), k_max + 1);
        Ok(FtSymbolic { radices, places })
    }

    /// Number of positive elements.
    pub fn len(&self) -> BigUint {
        self.radices.iter().product::<BigUint>() - 1u32
    }

    pub fn is_empty(&self) -> bool {
        self.len().is_zero()
    }

    /// `s_n` for `1 <= n <= len()`.
    pub fn term(&self, n: &BigUint) -> BigUint {
        let mut rest = n.clone();
        let mut v = BigUint::zero();
        for (e, w) in self.radices.iter().zip(&self.places) {
            let (q, d) = rest.div_rem(e);
            v += d * w;
            rest = q;
        }
        v
    }
}

/// Tail-window dimension estimate at a symbolic prefix length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicDims {
    pub n_max: String,
    pub log10_n_max: f64,
    pub window: String,
    pub lower: f64,
    pub upper: f64,
    /// Both extremes are exact to within this.
    pub tol: f64,
    pub nodes: u64,
}

/// Min and max of `ln n / ln s_n` over `[n_max - n_max/10, n_max]` for
/// `F^t` through block `k_max`, with `n_max = |F^t| - 1` by default.
///
/// `s_n` is increasing, so on `[a, b]` the ratio lies in
/// `[ln a / ln s_b, ln b / ln s_a]`; intervals are bisected until that
/// bracket cannot move the running extremes by more than `tol`.
pub fn ft_dims_symbolic(s: &Schedule, t: usize, k_max: usize, n_max: Option<BigUint>, tol: f64) -> Result<SymbolicDims> {
    let f = FtSymbolic::new(s, t, k_max)?;
    let n_max = n_max.unwrap_or_else(|| f.len());
    if n_max > f.len() || n_max < BigUint::from(20u32) {
        return Err(Error::InvalidArgument(format!("n_max must lie in [20, {}]", f.len())));
    }
    let window = (&n_max / 10u32).max(BigUint::from(10u32));
    let ratio = |n: &BigUint, sn: &BigUint| ratio::ln_uint(n) / ratio::ln_uint(sn);
    let lo = &n_max - &window;
    if f.term(&lo).is_one() {
        return Err(Error::InvalidArgument("s_n = 1 inside the window".into()));
    }
    let (s_lo, s_hi) = (f.term(&lo), f.term(&n_max));
    let mut lower = ratio(&lo, &s_lo).min(ratio(&n_max, &s_hi));
    let mut upper = ratio(&lo, &s_lo).max(ratio(&n_max, &s_hi));
    let mut stack = vec![(lo, s_lo, n_max.clone(), s_hi)];
    let mut nodes = 0u64;
    while let Some((a, sa, b, sb)) = stack.pop() {
        nodes += 1;
        let (ra, rb) = (ratio(&a, &sa), ratio(&b, &sb));
        lower = lower.min(ra).min(rb);
        upper = upper.max(ra).max(rb);
        if &b - &a <= BigUint::one() {
            continue;
        }
        let can_lower = ratio::ln_uint(&a) / ratio::ln_uint(&sb) < lower - tol;
        let can_raise = ratio::ln_uint(&b) / ratio::ln_uint(&sa) > upper + tol;
        if !(can_lower || can_raise) {
            continue;
        }
        let mid = (&a + &b) >> 1u32;
        let sm = f.term(&mid);
        stack.push((a, sa, mid.clone(), sm.clone()));
        stack.push((mid, sm, b, sb));
    }
    Ok(SymbolicDims {
        log10_n_max: ratio::ln_uint(&n_max) / std::f64::consts::LN_10,
        n_max: n_max.to_string(),
        window: window.to_string(),
        lower,
        upper,
        tol,
        nodes,
    })
}

// ---------------------------------------------------------------------------
// JSON document

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDoc {
    pub n: usize,
    pub e: Option<String>,
    pub r: String,
    pub h: String,
    pub h_tilde: String,
    pub w: String,
    pub c: String,
    pub c_log2: String,
    pub xi: String,
    pub insertion: Option<usize>,
    pub floored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub schema_version: u32,
    pub kind: ScheduleKind,
    pub tau: Option<String>,
    pub c_tau: Option<u64>,
    pub depth: usize,
    pub insertions: Vec<Insertion>,
    pub xi: String,
    pub xi_tail_bound: String,
    pub stages: Vec<StageDoc>,
}

impl Schedule {
    pub fn to_doc(&self) -> ScheduleDoc {
        let (tau, c_tau) = match &self.kind {
            ScheduleKind::Paper { tau, c_tau, .. } => (Some(tau.to_string()), Some(*c_tau)),
            ScheduleKind::Toy { .. } => (None, None),
        };
        let stages = self
            .stages
            .iter()
            .map(|s| StageDoc {
                n: s.n,
                e: s.e.as_ref().map(|e| e.to_string()),
                r: s.r.to_string(),
                h: s.h.to_string(),
                h_tilde: s.h_tilde.to_string(),
                w: s.w.to_string(),
                c: match s.column_count(4096) {
                    Some(c) => c.to_string(),
                    None => format!("2^{}", s.c_log2),
                },
                c_log2: s.c_log2.to_string(),
                xi: ratio::to_string(&s.xi),
                insertion: s.insertion,
                floored: s.floored,
            })
            .collect();
        ScheduleDoc {
            schema_version: SCHEMA_VERSION,
            kind: self.kind.clone(),
            tau,
            c_tau,
            depth: self.depth(),
            insertions: self.insertions.clone(),
            xi: ratio::to_string(&self.xi),
            xi_tail_bound: ratio::to_string(&self.xi_tail_bound),
            stages,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    /// Rebuild from a document by re-running the recursion from its
    /// generating parameters; every stored value must match exactly.
    pub fn from_doc(doc: &ScheduleDoc) -> Result<Self> {
        let s = match &doc.kind {
            ScheduleKind::Paper { tau, plan, .. } => paper_schedule(*tau, plan.clone(), doc.depth)?,
            ScheduleKind::Toy { e, r, insertions } => toy_schedule(e, r, insertions, Some(u64::MAX))?,
        };
        if s.to_doc() != *doc {
            return Err(Error::Parse("schedule document does not match its recursion".into()));
        }
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScheduleDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}

pub fn uint_ratio(n: &BigUint, d: &BigUint) -> Ratio {
    from_uint(n) / from_uint(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::ratio;

    fn u(x: &BigUint) -> u64 {
        x.to_u64().unwrap()
    }

    #[test]
    fn c_tau_values() {
        assert_eq!(Tau::new(1, 2).unwrap().c_tau(), 3);
        // 1/3: C^1 > 4
        assert_eq!(Tau::new(1, 3).unwrap().c_tau(), 5);
        // 2/3: C^2 > 2
        assert_eq!(Tau::new(2, 3).unwrap().c_tau(), 2);
        assert!(Tau::new(2, 2).is_err());
        assert_eq!(Tau::new(2, 4).unwrap(), Tau::new(1, 2).unwrap());
    }

    #[test]
    fn half_schedule_start() {
        let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 6).unwrap();
        let st = &s.stages;
        assert_eq!(u(st[0].e.as_ref().unwrap()), 2);
        assert_eq!(u(&st[0].h), 1);
        assert_eq!(u(&st[0].w), 1);
        assert_eq!(u(&st[1].h), 2);
        assert_eq!(u(&st[1].r), 3);
        assert_eq!(u(&st[2].r), 12);
        for n in 1..=6 {
            assert_eq!(u(&st[n].r), 3 * (n * n) as u64);
            assert!(u(st[n].e.as_ref().unwrap()) >= 2);
        }
        assert!(st[1].floored);
        assert!(st[2..].iter().all(|s| !s.floored));
    }

    #[test]
    fn invalid_plan_rejected() {
        let err = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Explicit(vec![(2, 2)]), 3);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn toy_recursion_by_hand() {
        let s = toy_schedule(&[2, 2], &[1, 2], &[], None).unwrap();
        let c: Vec<u64> = s.stages.iter().map(|st| 1u64 << u(&st.c_log2)).collect();
        assert_eq!(c, vec![2, 4, 16]);
        let h: Vec<u64> = s.stages.iter().map(|st| u(&st.h)).collect();
        assert_eq!(h, vec![1, 2, 4]);
        assert_eq!(u(&s.stages[1].h_tilde), 2);
        assert!(s.stages.iter().all(|st| st.w == st.h_tilde));
        assert_eq!(s.xi, Ratio::one());
    }

    #[test]
    fn toy_budget() {
        assert!(matches!(
            toy_schedule(&[2, 8, 8], &[1, 1, 1], &[], None),
            Err(Error::EnumerationInfeasible { .. })
        ));
    }

    #[test]
    fn single_insertion_xi() {
        // h~_2 = 2 * 3 = 6 with h_1 = 2? use h* = 1: ratio 1/6 -> xi = 6/7
        let s = toy_schedule(&[2, 1, 1], &[1, 3, 1], &[(2, 1, Some(1))], Some(u64::MAX)).unwrap();
        assert_eq!(u(&s.stages[2].h_tilde), 6);
        assert_eq!(s.xi, ratio(6, 7));
        assert_eq!(s.stages[3].xi, Ratio::one());
        assert_eq!(s.stages[2].xi, ratio(6, 7));
    }

    #[test]
    fn condition3_exact_half() {
        let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 8).unwrap();
        let rep = validate_conditions(&s, None).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.stages.iter().all(|c| c.condition3 && c.recursions));
        let last = rep.stages.last().unwrap();
        assert!(last.condition1_ratio_pow_q.as_ref().unwrap().contains('/'));
        assert!(last.condition1_ratio.unwrap() > 0.0);
    }

    #[test]
    fn toy_condition_violation_flagged() {
        let s = toy_schedule(&[2, 2, 2], &[1, 1, 1], &[], None).unwrap();
        let rep = validate_conditions(&s, Some(Tau::new(1, 3).unwrap())).unwrap();
        assert!(!rep.violations.is_empty());
        assert!(validate_conditions(&s, None).is_err());
    }

    #[test]
    fn ft_hand_expansion() {
        // stage n_t: w = 6, e = 2; stage n_t + 1: w = 24, e = 2
        let s = toy_schedule(&[2, 1, 2, 2], &[1, 2, 2, 1], &[(2, 1, Some(2))], Some(u64::MAX)).unwrap();
        assert_eq!(u(&s.stages[2].w), 6);
        assert_eq!(u(&s.stages[3].w), 24);
        let f = ft_sequence(&s, 1, 1, usize::MAX).unwrap();
        let o: Vec<u64> = f.offsets_u64().unwrap();
        assert_eq!(o, vec![0, 6, 24, 30]);
        assert_eq!(u(&f.block_sizes[1]), 4);
        let f0 = ft_sequence(&s, 1, 0, usize::MAX).unwrap();
        assert_eq!(f0.offsets_u64().unwrap(), vec![0, 6]);
        let seq = f.to_intseq("toy").unwrap();
        assert_eq!(seq.to_u64().unwrap(), vec![6, 24, 30]);
    }

    #[test]
    fn half_depth4_heights() {
        let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 4).unwrap();
        assert_eq!(u(&s.stages[3].w), 35004);
        assert_eq!(u(&s.stages[4].h), 945108);
        assert_eq!(u(&s.stages[4].c_log2), 1008);
    }

    #[test]
    fn symbolic_terms_match_enumeration() {
        let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 5).unwrap();
        let ft = ft_sequence(&s, 1, 1, 5000).unwrap();
        let sym = FtSymbolic::new(&s, 1, 1).unwrap();
        for (n, v) in ft.offsets.iter().enumerate().skip(1) {
            assert_eq!(&sym.term(&BigUint::from(n)), v);
        }
        // symbolic window search agrees with the enumerated estimator
        let n = 1200usize;
        let mut seq = ft.to_intseq("F1").unwrap();
        let d = crate::seqdim::estimate_dims_default(&mut seq, n).unwrap();
        let sd = ft_dims_symbolic(&s, 1, 1, Some(BigUint::from(n)), 1e-12).unwrap();
        assert!((d.lower - sd.lower).abs() < 1e-9 && (d.upper - sd.upper).abs() < 1e-9, "{d:?} {sd:?}");
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let s = paper_schedule(Tau::new(1, 2).unwrap(), InsertionPlan::Default, 5).unwrap();
        let text = s.to_json().unwrap();
        assert!(text.contains("\"tau\": \"1/2\""));
        let back = Schedule::from_json(&text).unwrap();
        assert_eq!(back, s);
        let tampered = text.replacen("\"r\": \"3\"", "\"r\": \"4\"", 1);
        assert!(Schedule::from_json(&tampered).is_err());
    }
}
