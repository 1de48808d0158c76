//! Exact unsigned integer types usable for weight and bound arithmetic.

use std::fmt::{Debug, Display};

use num_bigint::BigUint;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, ToPrimitive, Unsigned};

/// Unsigned integer with checked arithmetic.
///
/// Every comparison in the bounds module is a cross-multiplied integer
/// inequality, so any type that can add, subtract and multiply without silent
/// wraparound can carry it. `Q_CAP` is the largest question count for which
/// `2^q` and `n (q + 1)` are guaranteed to fit; `None` means unbounded.
pub trait ExactInt:
    Clone
    + Ord
    + Debug
    + Display
    + Unsigned
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
    const Q_CAP: Option<u32>;

    fn from_count(v: u64) -> Self {
        Self::from_u64(v).expect("u64 fits every supported ExactInt")
    }
}

impl ExactInt for u32 {
    const Q_CAP: Option<u32> = Some(25);

    fn from_count(v: u64) -> Self {
        u32::try_from(v).expect("count exceeds u32")
    }
}

impl ExactInt for u64 {
    const Q_CAP: Option<u32> = Some(57);
}

impl ExactInt for u128 {
    const Q_CAP: Option<u32> = Some(120);
}

impl ExactInt for BigUint {
    const Q_CAP: Option<u32> = None;
}

/// `2^exp`, or `None` on overflow or when `exp` is past the type's cap.
pub fn pow2<W: ExactInt>(exp: u32) -> Option<W> {
    if W::Q_CAP.is_some_and(|cap| exp > cap) {
        return None;
    }
    num_traits::checked_pow(W::from_count(2), exp as usize)
}

/// `(j + 1) a + b` with overflow reported as `None`.
pub fn weight_of<W: ExactInt>(a: &W, b: &W, j: u32) -> Option<W> {
    W::from_count(u64::from(j) + 1)
        .checked_mul(a)?
        .checked_add(b)
}

/// Smallest `ell` with `2^ell >= n`, computed by bit length.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_by_bit_length() {
        let cases = [
            (1, 0),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (1_000_000, 20),
            (1 << 20, 20),
            ((1 << 20) + 1, 21),
        ];
        for (n, ell) in cases {
            assert_eq!(ceil_log2(n), ell, "n={n}");
        }
    }

    #[test]
    fn pow2_respects_cap() {
        assert_eq!(pow2::<u64>(57), Some(1u64 << 57));
        assert_eq!(pow2::<u64>(58), None);
        assert_eq!(pow2::<u32>(25), Some(1 << 25));
        assert_eq!(pow2::<BigUint>(200), Some(BigUint::from(1u8) << 200usize));
    }

    #[test]
    fn weight_overflow_is_none() {
        assert_eq!(weight_of(&1u64, &20, 5), Some(26));
        assert_eq!(weight_of(&u64::MAX, &0, 1), None);
    }
}
