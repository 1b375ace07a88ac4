use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

/// Index of a column in `[0, c)`, stored as little-endian 64-bit limbs.
///
/// Column counts are powers of two, so the per-stage choice tuple of an
/// `Ind`/`Ins` column is a sequence of fixed-width bit fields: digit `k`
/// occupies bits `[k E, (k+1) E)` where `c_parent = 2^E`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnId {
    limbs: Vec<u64>,
}

impl ColumnId {
    pub fn zero() -> Self {
        ColumnId { limbs: Vec::new() }
    }

    fn trimmed(mut limbs: Vec<u64>) -> Self {
        while limbs.last() == Some(&0) {
            limbs.pop();
        }
        ColumnId { limbs }
    }

    fn word(&self, i: u64) -> u64 {
        self.limbs.get(i as usize).copied().unwrap_or(0)
    }

    /// Bits `[start, start + len)` as a new id.
    pub fn slice(&self, start: u64, len: u64) -> ColumnId {
        let n = len.div_ceil(64);
        let (ws, bs) = (start / 64, start % 64);
        let mut out = Vec::with_capacity(n as usize);
        for i in 0..n {
            let lo = self.word(ws + i) >> bs;
            let hi = if bs > 0 { self.word(ws + i + 1) << (64 - bs) } else { 0 };
            out.push(lo | hi);
        }
        if len % 64 != 0 {
            if let Some(last) = out.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        ColumnId::trimmed(out)
    }

    /// Digit `k` of width `width` bits.
    pub fn digit(&self, k: u64, width: u64) -> ColumnId {
        self.slice(k * width, width)
    }

    pub fn rem_u64(&self, m: u64) -> u64 {
        let mut r: u128 = 0;
        for &w in self.limbs.iter().rev() {
            r = ((r << 64) | w as u128) % m as u128;
        }
        r as u64
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self.limbs.len() {
            0 => Some(0),
            1 => Some(self.limbs[0]),
            _ => None,
        }
    }

    /// Number of significant bits.
    pub fn bits(&self) -> u64 {
        match self.limbs.last() {
            None => 0,
            Some(&w) => 64 * (self.limbs.len() as u64 - 1) + (64 - w.leading_zeros() as u64),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_slice(
            &self
                .limbs
                .iter()
                .flat_map(|&w| [w as u32, (w >> 32) as u32])
                .collect::<Vec<_>>(),
        )
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        ColumnId::trimmed(v.to_u64_digits())
    }

    /// Concatenate digits of equal width (`digits[0]` least significant).
    pub fn from_digits(digits: &[ColumnId], width: u64) -> Self {
        let mut v = BigUint::default();
        for d in digits.iter().rev() {
            v = (v << width) | d.to_biguint();
        }
        ColumnId::from_biguint(&v)
    }

    /// Uniform id in `[0, 2^bits)`.
    pub fn random<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Self {
        let n = bits.div_ceil(64);
        let mut limbs: Vec<u64> = (0..n).map(|_| rng.random::<u64>()).collect();
        if bits % 64 != 0 {
            if let Some(last) = limbs.last_mut() {
                *last &= (1u64 << (bits % 64)) - 1;
            }
        }
        ColumnId::trimmed(limbs)
    }
}

impl From<u64> for ColumnId {
    fn from(v: u64) -> Self {
        ColumnId::trimmed(vec![v])
    }
}

impl fmt::Display for ColumnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(bytes: &[u8]) -> BigUint {
        BigUint::from_bytes_le(bytes)
    }

    proptest! {
        #[test]
        fn slice_matches_bigint(bytes in proptest::collection::vec(any::<u8>(), 0..40), start in 0u64..400, len in 1u64..200) {
            let v = big(&bytes);
            let id = ColumnId::from_biguint(&v);
            let expect = (&v >> start) & ((BigUint::from(1u32) << len) - 1u32);
            prop_assert_eq!(id.slice(start, len).to_biguint(), expect);
        }

        #[test]
        fn rem_matches_bigint(bytes in proptest::collection::vec(any::<u8>(), 0..40), m in 1u64..1_000_000) {
            let v = big(&bytes);
            let id = ColumnId::from_biguint(&v);
            prop_assert_eq!(BigUint::from(id.rem_u64(m)), &v % m);
            prop_assert_eq!(id.to_biguint(), v);
        }
    }

    #[test]
    fn digits_roundtrip() {
        let d: Vec<ColumnId> = [3u64, 0, 5, 7].iter().map(|&x| x.into()).collect();
        let id = ColumnId::from_digits(&d, 3);
        assert_eq!(id.to_u64(), Some(3 + (5 << 6) + (7 << 9)));
        for (k, x) in d.iter().enumerate() {
            assert_eq!(&id.digit(k as u64, 3), x);
        }
        assert_eq!(ColumnId::from(0).bits(), 0);
        assert_eq!(id.bits(), 12);
    }
}
