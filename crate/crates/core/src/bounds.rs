//! Closed-form question counts for the one-lie game.
//!
//! All inequalities are decided by cross-multiplied integer comparisons.
//! [`Bounds`] is generic over the integer type carrying `n`, `2^q` and the
//! products; the crate root exposes `u64`, `u128` and arbitrary-precision
//! aliases.

use std::fmt::Write as _;
use std::marker::PhantomData;

use thiserror::Error;

use crate::num::{pow2, ExactInt};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("n must be at least {min}")]
    TooSmall { min: u64 },
    #[error("no question count up to the supported cap satisfies the bound for n={n}")]
    CapExceeded { n: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    PelcExact,
    Theorem2,
    VolumeLower,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundResult<W> {
    pub n: W,
    pub q: u32,
    /// Bit-question count; only meaningful for [`BoundKind::Theorem2`].
    pub ell: u32,
    pub kind: BoundKind,
}

/// Bound formulas over the exact integer type `W`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bounds<W>(PhantomData<W>);

impl<W: ExactInt> Bounds<W> {
    fn cap_error(n: &W) -> BoundsError {
        BoundsError::CapExceeded { n: n.to_string() }
    }

    fn check_n(n: &W) -> Result<(), BoundsError> {
        if n.is_zero() {
            Err(BoundsError::TooSmall { min: 1 })
        } else {
            Ok(())
        }
    }

    /// Smallest `q` for which `holds(q)` returns `Some(true)`; `None` means overflow.
    fn smallest_q(
        n: &W,
        start: u32,
        holds: impl Fn(u32) -> Option<bool>,
    ) -> Result<u32, BoundsError> {
        let mut q = start;
        loop {
            match holds(q) {
                Some(true) => return Ok(q),
                Some(false) => q += 1,
                None => return Err(Self::cap_error(n)),
            }
        }
    }

    /// `n (q + 1) <= 2^q`.
    pub fn volume_winnable(n: &W, q: u32) -> Result<bool, BoundsError> {
        Self::volume_holds(n, q).ok_or_else(|| Self::cap_error(n))
    }

    fn volume_holds(n: &W, q: u32) -> Option<bool> {
        let lhs = n.checked_mul(&W::from_count(u64::from(q) + 1))?;
        Some(lhs <= pow2::<W>(q)?)
    }

    /// The parity-dependent inequality of the exact formula.
    pub fn pelc_holds(n: &W, q: u32) -> Option<bool> {
        let two = W::from_count(2);
        if (n.clone() % two).is_zero() {
            Self::volume_holds(n, q)
        } else {
            let lhs = n.checked_mul(&W::from_count(u64::from(q) + 1))?;
            let rhs = pow2::<W>(q)?
                .checked_add(&W::one())?
                .checked_sub(&W::from_count(u64::from(q)))?;
            Some(lhs <= rhs)
        }
    }

    /// Optimal worst-case question count `q_1(n)`.
    ///
    /// Even `n`: least `q` with `n <= 2^q / (q + 1)`. Odd `n`: least `q` with
    /// `n <= (2^q - q + 1) / (q + 1)`.
    pub fn pelc_q1(n: &W) -> Result<u32, BoundsError> {
        Self::check_n(n)?;
        Self::smallest_q(n, 0, |q| Self::pelc_holds(n, q))
    }

    pub fn pelc_bound(n: &W) -> Result<BoundResult<W>, BoundsError> {
        let q = Self::pelc_q1(n)?;
        Ok(BoundResult {
            n: n.clone(),
            q,
            ell: 0,
            kind: BoundKind::PelcExact,
        })
    }

    /// `ceil(log2 n)` by doubling; exact for every `W`.
    pub fn ceil_log2(n: &W) -> Result<u32, BoundsError> {
        Self::check_n(n)?;
        let mut ell = 0;
        loop {
            if pow2::<W>(ell).ok_or_else(|| Self::cap_error(n))? >= *n {
                return Ok(ell);
            }
            ell += 1;
        }
    }

    /// Question count of the bit-search-then-halving strategy.
    ///
    /// `ell = ceil(log2 n)`, and `q` is least with `2^ell (q + 1) <= 2^q`.
    pub fn theorem2_bound(n: &W) -> Result<BoundResult<W>, BoundsError> {
        let ell = Self::ceil_log2(n)?;
        let padded = pow2::<W>(ell).ok_or_else(|| Self::cap_error(n))?;
        let q = Self::smallest_q(n, ell, |q| Self::volume_holds(&padded, q))?;
        Ok(BoundResult {
            n: n.clone(),
            q,
            ell,
            kind: BoundKind::Theorem2,
        })
    }

    /// Least `q` passing the volume condition; no strategy does better.
    pub fn volume_lower(n: &W) -> Result<BoundResult<W>, BoundsError> {
        Self::check_n(n)?;
        let q = Self::smallest_q(n, 0, |q| Self::volume_holds(n, q))?;
        Ok(BoundResult {
            n: n.clone(),
            q,
            ell: 0,
            kind: BoundKind::VolumeLower,
        })
    }

    /// Strategy bound minus the optimum.
    pub fn gap(n: &W) -> Result<i64, BoundsError> {
        if *n < W::from_count(2) {
            return Err(BoundsError::TooSmall { min: 2 });
        }
        Ok(i64::from(Self::theorem2_bound(n)?.q) - i64::from(Self::pelc_q1(n)?))
    }

    /// Largest `n` with `n (q + 1) <= 2^q`, i.e. `floor(2^q / (q + 1))`.
    pub fn max_volume_n(q: u32) -> Option<W> {
        let cap = pow2::<W>(q)?;
        Some(cap / W::from_count(u64::from(q) + 1))
    }
}

pub fn pelc_q1(n: u64) -> Result<u32, BoundsError> {
    Bounds::<u64>::pelc_q1(&n)
}

pub fn theorem2_bound(n: u64) -> Result<BoundResult<u64>, BoundsError> {
    Bounds::<u64>::theorem2_bound(&n)
}

pub fn volume_winnable(n: u64, q: u32) -> Result<bool, BoundsError> {
    Bounds::<u64>::volume_winnable(&n, q)
}

pub fn gap(n: u64) -> Result<i64, BoundsError> {
    Bounds::<u64>::gap(&n)
}

pub fn max_volume_n(q: u32) -> Option<u64> {
    Bounds::<u64>::max_volume_n(q)
}

/// Comma-separated table with columns `n,pelc_q1,theorem2_q,ell,gap`.
/// The gap column is empty for `n = 1`.
pub fn table(from: u64, to: u64) -> Result<String, BoundsError> {
    let mut out = String::from("n,pelc_q1,theorem2_q,ell,gap\n");
    for n in from.max(1)..=to {
        let exact = pelc_q1(n)?;
        let strategy = theorem2_bound(n)?;
        let gap = if n >= 2 {
            (i64::from(strategy.q) - i64::from(exact)).to_string()
        } else {
            String::new()
        };
        writeln!(out, "{n},{exact},{},{},{gap}", strategy.q, strategy.ell)
            .expect("writing to a String");
    }
    Ok(out)
}
