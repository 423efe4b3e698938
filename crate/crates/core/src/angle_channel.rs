//! Storing an n-bit value as a plane angle.
//!
//! The value `x = Σ 2^{-i}·bᵢ ∈ [0, 1)` is encoded as `θ_x = 2π(x + 2^{-n-1})`,
//! the center of the arc of angles agreeing with `x` in the first `n` bits.
//! Decoding maps a (circular) reading back to the nearest code center, ties
//! toward the smaller value. The channel tolerates a total additive angular
//! error of up to `2^{-n}·π`; the corrigible error pairs form a triangle of
//! area `2^{-2n-1}·π²`, so the required precision is `2^{2n+1}/π²`, growing
//! fourfold per extra bit.

use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::precision::{Channel, ErrorModel, Interval, PrecisionError};

/// Upper limit on the stored width: exhaustive worst-case checks stay
/// sub-second while far exceeding what is needed to exhibit the 4^n law.
pub const MAX_BITS: u32 = 20;

const PI_SQUARED: f64 = PI * PI;

#[derive(Debug, Error, PartialEq)]
pub enum AngleError {
    #[error("bit width must be between 1 and {MAX_BITS}, got {0}")]
    BadWidth(u32),
    #[error("value {value} does not fit in {bits} bits")]
    ValueTooWide { value: u64, bits: u32 },
    #[error("bit string must be non-empty and over {{0,1}}, got `{0}`")]
    BadBitString(String),
}

fn check_bits(bits: u32) -> Result<(), AngleError> {
    if bits == 0 || bits > MAX_BITS {
        return Err(AngleError::BadWidth(bits));
    }
    Ok(())
}

/// An n-bit stored value, most significant bit first: `x = raw / 2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitValue {
    bits: u32,
    raw: u64,
}

impl BitValue {
    pub fn new(bits: u32, raw: u64) -> Result<Self, AngleError> {
        check_bits(bits)?;
        if raw >> bits != 0 {
            return Err(AngleError::ValueTooWide { value: raw, bits });
        }
        Ok(BitValue { bits, raw })
    }

    /// Parses a bit string like `"101"`, most significant (2^{-1}) first.
    pub fn from_bit_str(s: &str) -> Result<Self, AngleError> {
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(AngleError::BadBitString(s.to_string()));
        }
        let bits = s.len() as u32;
        check_bits(bits)?;
        let raw = u64::from_str_radix(s, 2).expect("validated binary digits");
        Ok(BitValue { bits, raw })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn raw(&self) -> u64 {
        self.raw
    }

    /// The numeric value `raw · 2^{-n}`; exact in an f64 for n <= 20.
    pub fn value(&self) -> f64 {
        self.raw as f64 * (-(self.bits as f64)).exp2()
    }
}

impl fmt::Display for BitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.raw, width = self.bits as usize)
    }
}

/// A plane angle in radians, normalized into `[0, 2π)`; 0 and 2π coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    radians: f64,
}

impl Angle {
    pub fn from_radians(radians: f64) -> Self {
        assert!(radians.is_finite(), "angles must be finite");
        let mut r = radians.rem_euclid(TAU);
        // rem_euclid can round up to the modulus for tiny negatives.
        if r >= TAU {
            r = 0.0;
        }
        Angle { radians: r }
    }

    pub fn radians(&self) -> f64 {
        self.radians
    }

    /// Shorter arc between two angles, in `[0, π]`.
    pub fn circular_distance(&self, other: Angle) -> f64 {
        let d = (self.radians - other.radians).abs();
        d.min(TAU - d)
    }
}

/// `θ_x = 2π(x + 2^{-n-1})`, the center of the value's angular cell.
pub fn encode(v: BitValue) -> Angle {
    let half_cell = (-(v.bits as f64 + 1.0)).exp2();
    Angle::from_radians(TAU * (v.value() + half_cell))
}

/// Nearest-center decode: `θ/2π − 2^{-n-1}` scaled to cells, rounded to the
/// nearest value with ties toward the smaller one. Total on all angles and
/// exactly inverts [`encode`].
pub fn decode(theta: Angle, bits: u32) -> Result<BitValue, AngleError> {
    check_bits(bits)?;
    let cells = (1u64 << bits) as f64;
    let half_cell = (-(bits as f64 + 1.0)).exp2();
    let y = (theta.radians() / TAU - half_cell).rem_euclid(1.0);
    let t = y * cells;
    // ceil(t - 1/2) rounds to nearest with half-way readings going down.
    let k = (t - 0.5).ceil() as i64;
    let raw = k.rem_euclid(cells as i64) as u64;
    Ok(BitValue { bits, raw })
}

/// Maximal corrigible total error `ε₁ + ε₂`: `2^{-n}·π` radians.
pub fn threshold(bits: u32) -> f64 {
    assert!(bits >= 1, "threshold needs a positive width");
    PI * (-(bits as f64)).exp2()
}

/// Area of the corrigible triangle `{ε₁, ε₂ >= 0, ε₁+ε₂ <= 2^{-n}π}`:
/// `2^{-2n-1}·π²`.
pub fn closed_form_area(bits: u32) -> f64 {
    assert!(bits >= 1, "area needs a positive width");
    PI_SQUARED * (-(2.0 * bits as f64 + 1.0)).exp2()
}

/// Required precision `2^{2n+1}/π²`, the reciprocal of [`closed_form_area`].
pub fn closed_form_precision(bits: u32) -> f64 {
    assert!(bits >= 1, "precision needs a positive width");
    (2.0 * bits as f64 + 1.0).exp2() / PI_SQUARED
}

/// The angle store/retrieve channel wired into the `precision` interfaces:
/// additive angular error, endpoint checks sufficient, threshold hint
/// `2^{-n}·π`, success = exact n-bit agreement.
#[derive(Debug, Clone)]
pub struct AngleChannel {
    bits: u32,
    centers: Vec<f64>,
}

/// Builds the channel for a given width.
pub fn as_channel(bits: u32) -> Result<AngleChannel, AngleError> {
    check_bits(bits)?;
    let centers = (0..1u64 << bits)
        .map(|raw| encode(BitValue { bits, raw }).radians())
        .collect();
    Ok(AngleChannel { bits, centers })
}

impl Channel for AngleChannel {
    fn bits(&self) -> u32 {
        self.bits
    }

    fn error_model(&self) -> ErrorModel {
        ErrorModel::Additive
    }

    fn encode(&self, value: u64) -> f64 {
        self.centers[value as usize]
    }

    fn decode(&self, reading: f64) -> u64 {
        decode(Angle::from_radians(reading), self.bits)
            .expect("channel width validated at construction")
            .raw
    }

    /// Additive widening, saturated at one full turn: an angular spread
    /// covering the whole circle reaches exactly the same readings as any
    /// wider one, and saturating keeps the extreme points the worst case.
    fn perturb(&self, spread: Interval, eps: f64) -> Result<Interval, PrecisionError> {
        if !ErrorModel::Additive.legal_eps(eps) {
            return Err(PrecisionError::IllegalEps { model: ErrorModel::Additive, eps });
        }
        let lo = spread.lo - eps;
        let hi = spread.hi + eps;
        if hi - lo >= TAU {
            let mid = 0.5 * (lo + hi);
            Ok(Interval { lo: mid - PI, hi: mid + PI })
        } else {
            Ok(Interval { lo, hi })
        }
    }

    fn corner_sufficient(&self) -> bool {
        true
    }

    fn threshold_hint(&self) -> Option<f64> {
        Some(threshold(self.bits))
    }
}
