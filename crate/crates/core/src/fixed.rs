// SPDX-License-Identifier: Apache-2.0

//! 16-bit signed fixed-point arithmetic used by the neuron datapath.
//!
//! Values are stored as raw `i16` with a per-core number of fraction bits.
//! All arithmetic saturates; multiplication truncates toward negative
//! infinity (arithmetic shift of the 32-bit product).

use serde::{Deserialize, Serialize};
use std::fmt;

/// Raw fixed-point value. The interpretation depends on a [`QFormat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixed(pub i16);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const MAX: Fixed = Fixed(i16::MAX);
    pub const MIN: Fixed = Fixed(i16::MIN);

    #[inline]
    pub const fn raw(self) -> i16 {
        self.0
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number format `Q(15-f).f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QFormat {
    pub frac_bits: u8,
}

impl Default for QFormat {
    fn default() -> Self {
        QFormat::Q8_8
    }
}

impl QFormat {
    pub const Q8_8: QFormat = QFormat { frac_bits: 8 };

    pub fn new(frac_bits: u8) -> Option<QFormat> {
        (frac_bits <= 14).then_some(QFormat { frac_bits })
    }

    /// One LSB as a float.
    pub fn lsb(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn one(self) -> Fixed {
        Fixed(1i16 << self.frac_bits)
    }

    pub fn max_value(self) -> f64 {
        i16::MAX as f64 * self.lsb()
    }

    pub fn min_value(self) -> f64 {
        i16::MIN as f64 * self.lsb()
    }

    pub fn to_f64(self, x: Fixed) -> f64 {
        x.0 as f64 * self.lsb()
    }

    /// Round-to-nearest-even conversion. `None` when out of range or not finite.
    pub fn from_f64(self, value: f64) -> Option<Fixed> {
        if !value.is_finite() {
            return None;
        }
        let scaled = value * (self.frac_bits as f64).exp2();
        let rounded = scaled.round_ties_even();
        if rounded < i16::MIN as f64 || rounded > i16::MAX as f64 {
            return None;
        }
        Some(Fixed(rounded as i16))
    }

    /// Conversion that clamps out-of-range values instead of failing.
    pub fn from_f64_saturating(self, value: f64) -> Fixed {
        if value.is_nan() {
            return Fixed::ZERO;
        }
        let scaled = (value * (self.frac_bits as f64).exp2()).round_ties_even();
        Fixed(scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16)
    }

    /// An integer value in state units (`n << f`), saturating.
    pub fn from_int(self, n: i32) -> Fixed {
        saturate((n as i64) << self.frac_bits).0
    }
}

/// Clamp a wide value into `i16`, reporting whether it clipped.
#[inline]
pub fn saturate(v: i64) -> (Fixed, bool) {
    if v > i16::MAX as i64 {
        (Fixed::MAX, true)
    } else if v < i16::MIN as i64 {
        (Fixed::MIN, true)
    } else {
        (Fixed(v as i16), false)
    }
}

/// Saturating arithmetic unit. Counts every clipping event.
#[derive(Debug, Clone, Default)]
pub struct Alu {
    pub format: QFormat,
    pub saturations: u64,
}

impl Alu {
    pub fn new(format: QFormat) -> Alu {
        Alu { format, saturations: 0 }
    }

    #[inline]
    fn sat(&mut self, v: i64) -> Fixed {
        let (x, clipped) = saturate(v);
        self.saturations += clipped as u64;
        x
    }

    #[inline]
    pub fn add(&mut self, a: Fixed, b: Fixed) -> Fixed {
        self.sat(a.0 as i64 + b.0 as i64)
    }

    #[inline]
    pub fn sub(&mut self, a: Fixed, b: Fixed) -> Fixed {
        self.sat(a.0 as i64 - b.0 as i64)
    }

    /// Product truncated toward negative infinity to `f` fraction bits.
    #[inline]
    pub fn mul(&mut self, a: Fixed, b: Fixed) -> Fixed {
        let p = (a.0 as i64 * b.0 as i64) >> self.format.frac_bits;
        self.sat(p)
    }

    /// Arithmetic shift; positive amounts shift left.
    pub fn shift(&mut self, a: Fixed, amount: i32) -> Fixed {
        if amount >= 0 {
            let amount = amount.min(31) as u32;
            self.sat((a.0 as i64) << amount)
        } else {
            let amount = (-amount).min(15) as u32;
            Fixed(a.0 >> amount)
        }
    }

    /// Add a wide accumulator (e.g. summed synaptic input) to a value.
    pub fn add_wide(&mut self, a: Fixed, wide: i64) -> Fixed {
        self.sat(a.0 as i64 + wide)
    }

    pub fn clamp_wide(&mut self, wide: i64) -> Fixed {
        self.sat(wide)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        let q = QFormat::Q8_8;
        assert_eq!(q.from_f64(0.5), Some(Fixed(128)));
        assert_eq!(q.from_f64(1.0 / 3.0), Some(Fixed(85)));
        assert!((1.0 / 3.0 - 85.0 / 256.0f64).abs() <= 2f64.powi(-9));
        assert_eq!(q.from_f64(200.0), None);
        assert_eq!(q.from_f64(f64::NAN), None);
    }

    #[test]
    fn ties_round_to_even() {
        let q = QFormat::Q8_8;
        assert_eq!(q.from_f64(0.5 / 256.0), Some(Fixed(0)));
        assert_eq!(q.from_f64(1.5 / 256.0), Some(Fixed(2)));
        assert_eq!(q.from_f64(-1.5 / 256.0), Some(Fixed(-2)));
        assert_eq!(q.from_f64(-2.5 / 256.0), Some(Fixed(-2)));
    }

    #[test]
    fn mul_floors_and_saturates() {
        let mut alu = Alu::new(QFormat::Q8_8);
        // -1 LSB * 0.5 = -0.5 LSB -> floor to -1
        assert_eq!(alu.mul(Fixed(-1), Fixed(128)), Fixed(-1));
        assert_eq!(alu.mul(Fixed(1), Fixed(128)), Fixed(0));
        assert_eq!(alu.saturations, 0);
        assert_eq!(alu.mul(Fixed(100 * 256), Fixed(100 * 256)), Fixed::MAX);
        assert_eq!(alu.add(Fixed::MAX, Fixed(1)), Fixed::MAX);
        assert_eq!(alu.sub(Fixed::MIN, Fixed(1)), Fixed::MIN);
        assert_eq!(alu.saturations, 3);
    }

    #[test]
    fn shift_is_arithmetic() {
        let mut alu = Alu::new(QFormat::Q8_8);
        assert_eq!(alu.shift(Fixed(-3), -1), Fixed(-2));
        assert_eq!(alu.shift(Fixed(3), 2), Fixed(12));
        assert_eq!(alu.shift(Fixed(0x4000), 2), Fixed::MAX);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ops_are_clamped_exact_results(a: i16, b: i16) {
            let mut alu = Alu::new(QFormat::Q8_8);
            let clamp = |v: i64| Fixed(v.clamp(i16::MIN as i64, i16::MAX as i64) as i16);
            prop_assert_eq!(alu.add(Fixed(a), Fixed(b)), clamp(a as i64 + b as i64));
            prop_assert_eq!(alu.sub(Fixed(a), Fixed(b)), clamp(a as i64 - b as i64));
            let exact = a as f64 * b as f64 / 256.0;
            prop_assert_eq!(alu.mul(Fixed(a), Fixed(b)), clamp(exact.floor() as i64));
        }

        #[test]
        fn quantize_is_nearest(frac in 0u8..=14, x in -100.0f64..100.0) {
            let q = QFormat::new(frac).unwrap();
            match q.from_f64(x) {
                Some(f) => prop_assert!((q.to_f64(f) - x).abs() <= q.lsb() / 2.0),
                None => prop_assert!(x > q.max_value() || x < q.min_value()),
            }
        }

        #[test]
        fn representable_values_roundtrip(raw: i16, frac in 0u8..=14) {
            let q = QFormat::new(frac).unwrap();
            prop_assert_eq!(q.from_f64(q.to_f64(Fixed(raw))), Some(Fixed(raw)));
        }
    }
}
