//! Targets and difficulties.
//!
//! A [`Target`] is a 256-bit threshold. Difficulty relative to the maximum
//! target `2^224` is `2^224 / target`; [`Difficulty`] expresses that ratio in
//! [`LZ`] units, so `Difficulty(1)` corresponds to target `2^184`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::sampler::LZ;
use crate::{Error, Result};

/// Exponent of the reference target: absolute difficulty 1 is target `2^224`.
pub const REFERENCE_TARGET_BITS: u32 = 224;

/// log2 of [`LZ`].
const LZ_BITS: i32 = 40;

/// Positive difficulty in [`LZ`] units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Difficulty(f64);

impl Difficulty {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Difficulty(value))
        } else {
            Err(Error::domain(format!(
                "difficulty must be positive and finite, got {value}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Difficulty in hash evaluations (`self * LZ`).
    pub fn absolute(self) -> f64 {
        self.0 * LZ
    }

    pub fn from_target(target: &Target) -> Self {
        Difficulty(difficulty_from_target(target))
    }
}

impl TryFrom<f64> for Difficulty {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Difficulty::new(value)
    }
}

impl From<Difficulty> for f64 {
    fn from(d: Difficulty) -> f64 {
        d.0
    }
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A proof-of-work target: `0 < value < 2^256`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Target(BigUint);

impl Target {
    pub fn new(value: BigUint) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::domain("target must be positive"));
        }
        if value.bits() > 256 {
            return Err(Error::domain("target exceeds 256 bits"));
        }
        Ok(Target(value))
    }

    pub fn from_u64(value: u64) -> Result<Self> {
        Target::new(BigUint::from(value))
    }

    /// `2^bits`. Panics if `bits > 255`.
    pub fn pow2(bits: u32) -> Self {
        assert!(bits < 256, "2^{bits} does not fit in 256 bits");
        Target(BigUint::one() << bits)
    }

    /// The default proof-of-work limit, `2^224`, i.e. absolute difficulty 1.
    pub fn default_pow_limit() -> Self {
        Target::pow2(REFERENCE_TARGET_BITS)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_value(self) -> BigUint {
        self.0
    }

    /// `floor(2^224 / (d * LZ))`.
    pub fn from_difficulty(d: Difficulty) -> Result<Self> {
        target_from_absolute(d.get(), LZ_BITS)
    }

    /// `floor(2^224 / d_abs)` for a difficulty expressed in hash evaluations.
    pub fn from_absolute_difficulty(d_abs: f64) -> Result<Self> {
        if !(d_abs.is_finite() && d_abs > 0.0) {
            return Err(Error::domain(format!(
                "difficulty must be positive and finite, got {d_abs}"
            )));
        }
        target_from_absolute(d_abs, 0)
    }

    /// Nearest `f64` to the target.
    pub fn to_f64(&self) -> f64 {
        biguint_to_f64(&self.0)
    }

    /// Clamps to `1 ..= limit`, taking ownership of an unchecked big integer.
    pub fn clamped(value: BigUint, limit: &Target) -> Target {
        if value.is_zero() {
            Target(BigUint::one())
        } else if value > limit.0 {
            limit.clone()
        } else {
            Target(value)
        }
    }

    /// Compact ("nBits") encoding: mantissa `bits & 0x7fffff` times
    /// `256^(exponent - 3)`.
    pub fn from_compact(bits: u32) -> Result<Self> {
        let exponent = bits >> 24;
        let mantissa = bits & 0x007f_ffff;
        if bits & 0x0080_0000 != 0 && mantissa != 0 {
            return Err(Error::domain(format!(
                "compact bits {bits:#010x} encode a negative target"
            )));
        }
        let value = if exponent <= 3 {
            BigUint::from(mantissa >> (8 * (3 - exponent)))
        } else {
            BigUint::from(mantissa) << (8 * (exponent - 3))
        };
        Target::new(value).map_err(|e| match e {
            Error::Domain(reason) => Error::domain(format!("compact bits {bits:#010x}: {reason}")),
            other => other,
        })
    }

    /// Inverse of [`Target::from_compact`]; low-order bytes beyond the
    /// 23-bit mantissa are truncated.
    pub fn to_compact(&self) -> u32 {
        let mut size = self.0.bits().div_ceil(8) as u32;
        let mut mantissa: u32 = if size <= 3 {
            (self.0.to_u64().unwrap_or(0) << (8 * (3 - size))) as u32
        } else {
            (&self.0 >> (8 * (size - 3))).to_u32().unwrap_or(0)
        };
        // The sign bit must stay clear.
        if mantissa & 0x0080_0000 != 0 {
            mantissa >>= 8;
            size += 1;
        }
        (size << 24) | mantissa
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Difficulty in `LZ` units for `target`: `2^184 / target`.
pub fn difficulty_from_target(target: &Target) -> f64 {
    let bits = REFERENCE_TARGET_BITS as i32 - LZ_BITS;
    2f64.powi(bits) / target.to_f64()
}

/// `floor(2^224 / (value * 2^scale_bits))` computed exactly from the binary
/// expansion of `value`.
fn target_from_absolute(value: f64, scale_bits: i32) -> Result<Target> {
    let (mantissa, exponent) = decompose(value)?;
    let shift = REFERENCE_TARGET_BITS as i64 - (exponent as i64 + scale_bits as i64);
    if shift < 0 {
        return Err(Error::domain(format!(
            "difficulty {value} is too large: target underflows to 0"
        )));
    }
    if shift > 256 + 64 {
        return Err(Error::domain(format!(
            "difficulty {value} is too small: target exceeds 256 bits"
        )));
    }
    let numerator = BigUint::one() << (shift as u64);
    let quotient = numerator / BigUint::from(mantissa);
    if quotient.is_zero() {
        return Err(Error::domain(format!(
            "difficulty {value} is too large: target underflows to 0"
        )));
    }
    Target::new(quotient)
        .map_err(|_| Error::domain(format!("difficulty {value} is too small: target exceeds 256 bits")))
}

/// Splits a positive finite double into `mantissa * 2^exponent`.
fn decompose(value: f64) -> Result<(u64, i32)> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::domain(format!(
            "difficulty must be positive and finite, got {value}"
        )));
    }
    let bits = value.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exponent) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = mantissa.trailing_zeros();
    mantissa >>= tz;
    exponent += tz as i32;
    Ok((mantissa, exponent))
}

/// Round-to-nearest conversion of the top 64 significant bits.
pub(crate) fn biguint_to_f64(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 64 {
        return value.to_u64().unwrap_or(0) as f64;
    }
    let shift = bits - 64;
    let top = (value >> shift).to_u64().unwrap_or(u64::MAX);
    top as f64 * 2f64.powi(shift as i32)
}
