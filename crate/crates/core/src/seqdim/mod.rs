//! Integer sequences and their dimension.
//!
//! A sequence `S = {s_1 < s_2 < ...}` of positive integers has upper
//! (lower) dimension given by the threshold exponent at which
//! `n / s_n^tau` switches from divergence to decay along a limsup (liminf).
//! Only finite prefixes are ever examined: [`dim_profile`] returns the
//! prefix of `n / s_n^tau`, and [`estimate_dims`] returns the spread of
//! `ln n / ln s_n` over a tail window.

mod extract;
mod transforms;

pub use extract::{hereditary_extract, Extraction};
pub use transforms::{densify, power_merge, reverse_blocks, seq_floor_div, seq_scale};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::ratio::ln_uint;
use crate::{Error, Result};

/// How the terms of an [`IntSeq`] are (or were) produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Fixed list; cannot be extended.
    Explicit,
    /// `s_n = n`.
    Naturals,
    /// `s_n = n^2`.
    Squares,
    /// `s_n = a + (n-1) d`.
    Arithmetic { a: u64, d: u64 },
    /// `s_n = base^n`.
    Powers { base: u32 },
    /// `s_n = floor(n^(num/den))`, exponent at least one.
    FloorPower { num: u32, den: u32 },
    /// Positive part of the sumset sequence `F^t` of a schedule.
    Ft { schedule: String, t: usize },
    /// Result of a sequence transform; terms are computed eagerly.
    Transform { op: String, of: Box<Generator> },
}

impl Generator {
    pub fn is_extendable(&self) -> bool {
        !matches!(
            self,
            Generator::Explicit | Generator::Ft { .. } | Generator::Transform { .. }
        )
    }

    fn term(&self, n: u64) -> Option<BigUint> {
        let n_big = BigUint::from(n);
        Some(match self {
            Generator::Naturals => n_big,
            Generator::Squares => &n_big * &n_big,
            Generator::Arithmetic { a, d } => BigUint::from(*a) + BigUint::from(*d) * (n - 1),
            Generator::Powers { base } => BigUint::from(*base).pow(n as u32),
            Generator::FloorPower { num, den } => n_big.pow(*num).nth_root(*den),
            _ => return None,
        })
    }
}

/// A finite, strictly increasing prefix of a sequence of positive integers.
///
/// Extension through the generator only ever appends, so previously
/// produced terms never change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntSeq {
    terms: Vec<BigUint>,
    generator: Generator,
}

impl IntSeq {
    /// Build from explicit terms, checking positivity and strict increase.
    pub fn explicit<I, T>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<BigUint>,
    {
        Self::from_terms(terms.into_iter().map(Into::into).collect(), Generator::Explicit)
    }

    pub(crate) fn from_terms(terms: Vec<BigUint>, generator: Generator) -> Result<Self> {
        if let Some(first) = terms.first() {
            if *first < BigUint::one() {
                return Err(Error::InvalidArgument("sequence terms must be >= 1".into()));
            }
        }
        if let Some(i) = terms.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "sequence not strictly increasing at n = {}",
                i + 2
            )));
        }
        Ok(IntSeq { terms, generator })
    }

    /// An empty prefix of a lazily extendable sequence.
    pub fn lazy(generator: Generator) -> Result<Self> {
        match generator {
            Generator::Arithmetic { a, d } if a == 0 || d == 0 => {
                Err(Error::InvalidArgument("arithmetic sequence needs a, d >= 1".into()))
            }
            Generator::Powers { base } if base < 2 => {
                Err(Error::InvalidArgument("powers need base >= 2".into()))
            }
            Generator::FloorPower { num, den } if den == 0 || num < den => Err(
                Error::InvalidArgument("floor-power exponent must be >= 1".into()),
            ),
            g if !g.is_extendable() => Err(Error::InvalidArgument(
                "generator is not lazily extendable".into(),
            )),
            generator => Ok(IntSeq { terms: Vec::new(), generator }),
        }
    }

    pub fn naturals() -> Self {
        IntSeq { terms: Vec::new(), generator: Generator::Naturals }
    }

    pub fn squares() -> Self {
        IntSeq { terms: Vec::new(), generator: Generator::Squares }
    }

    pub fn powers_of_two() -> Self {
        IntSeq { terms: Vec::new(), generator: Generator::Powers { base: 2 } }
    }

    /// Extend (if needed) so that at least `n` terms are available.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        if self.terms.len() >= n {
            return Ok(());
        }
        if !self.generator.is_extendable() {
            return Err(Error::InsufficientSequence { needed: n, available: self.terms.len() });
        }
        self.terms.reserve(n - self.terms.len());
        match self.generator {
            // incremental products are much cheaper than fresh powers
            Generator::Powers { base } => {
                let mut cur = match self.terms.last() {
                    Some(t) => t.clone(),
                    None => BigUint::one(),
                };
                while self.terms.len() < n {
                    cur *= base;
                    self.terms.push(cur.clone());
                }
            }
            _ => {
                for k in self.terms.len()..n {
                    let t = self.generator.term(k as u64 + 1).expect("extendable");
                    self.terms.push(t);
                }
            }
        }
        Ok(())
    }

    pub fn with_len(mut self, n: usize) -> Result<Self> {
        self.extend_to(n)?;
        Ok(self)
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// 1-based access, `s_n`.
    pub fn get(&self, n: usize) -> Option<&BigUint> {
        n.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    /// Terms as `u64` offsets, failing if any term does not fit.
    pub fn to_u64(&self) -> Result<Vec<u64>> {
        self.terms
            .iter()
            .map(|t| {
                t.to_u64()
                    .ok_or_else(|| Error::InvalidArgument(format!("term {t} exceeds u64")))
            })
            .collect()
    }

    pub(crate) fn transformed(&self, op: &str, terms: Vec<BigUint>) -> Result<Self> {
        Self::from_terms(
            terms,
            Generator::Transform { op: op.to_string(), of: Box::new(self.generator.clone()) },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    /// `n / s_n^tau`; underflows to zero for astronomically large terms.
    pub value: f64,
    /// `ln(n / s_n^tau)`, always finite.
    pub ln_value: f64,
}

/// Finite prefix of `n / s_n^tau`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimProfile {
    pub tau: f64,
    pub points: Vec<ProfilePoint>,
    pub window: usize,
}

/// Tail window used when none is given: last 10% of terms, at least 10.
pub fn default_window(n_max: usize) -> usize {
    (n_max / 10).max(10)
}

pub fn dim_profile(s: &mut IntSeq, tau: f64, n_max: usize) -> Result<DimProfile> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!("tau = {tau} outside [0, 1]")));
    }
    s.extend_to(n_max)?;
    let points = s.terms[..n_max]
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let n = i + 1;
            let ln_value = (n as f64).ln() - tau * ln_uint(t);
            ProfilePoint { n, value: ln_value.exp(), ln_value }
        })
        .collect();
    Ok(DimProfile { tau, points, window: default_window(n_max).min(n_max) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub lower: f64,
    pub upper: f64,
    pub n_max: usize,
    pub window: usize,
}

/// Lower/upper dimension estimate: min and max of `ln n / ln s_n` over the
/// tail window `[n_max - window, n_max]`.
pub fn estimate_dims(s: &mut IntSeq, n_max: usize, window: usize) -> Result<DimEstimate> {
    if window < 10 || n_max < 2 * window {
        return Err(Error::InvalidArgument(format!(
            "need n_max >= 2 * window >= 20 (n_max = {n_max}, window = {window})"
        )));
    }
    s.extend_to(n_max)?;
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for n in (n_max - window)..=n_max {
        let t = &s.terms[n - 1];
        if t.is_one() {
            return Err(Error::InvalidArgument(format!("s_{n} = 1 inside the window")));
        }
        let r = (n as f64).ln() / ln_uint(t);
        lower = lower.min(r);
        upper = upper.max(r);
    }
    Ok(DimEstimate { lower, upper, n_max, window })
}

/// [`estimate_dims`] with the default tail window.
pub fn estimate_dims_default(s: &mut IntSeq, n_max: usize) -> Result<DimEstimate> {
    estimate_dims(s, n_max, default_window(n_max))
}
