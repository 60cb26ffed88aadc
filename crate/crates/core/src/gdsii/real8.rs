// SPDX-License-Identifier: Apache-2.0

//! GDSII 8-byte real: sign bit, 7-bit excess-64 base-16 exponent, 56-bit
//! mantissa. Every finite `f64` in range encodes exactly (its 53-bit
//! significand fits the 56-bit mantissa after a shift of at most 3).

use super::GdsError;

const MANTISSA_MASK: u64 = (1 << 56) - 1;

pub fn decode(bits: u64) -> f64 {
    let negative = bits >> 63 != 0;
    let exponent = ((bits >> 56) & 0x7f) as i32 - 64;
    let mantissa = bits & MANTISSA_MASK;
    let magnitude = mantissa as f64 * 2f64.powi(4 * exponent - 56);
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

pub fn encode(value: f64) -> Result<u64, GdsError> {
    if !value.is_finite() {
        return Err(GdsError::RealOutOfRange(value));
    }
    if value == 0.0 {
        return Ok(0);
    }
    let sign = if value < 0.0 { 1u64 << 63 } else { 0 };
    let raw = value.abs().to_bits();
    let biased_exp = ((raw >> 52) & 0x7ff) as i32;
    let fraction = raw & ((1 << 52) - 1);
    // value = significand * 2^exp with the significand's top bit at position 52
    let (mut significand, mut exp) = if biased_exp == 0 {
        (fraction, -1074)
    } else {
        (fraction | (1 << 52), biased_exp - 1075)
    };
    while significand < (1 << 52) {
        significand <<= 1;
        exp -= 1;
    }
    let shift = (exp + 56).rem_euclid(4);
    let hex_exp = (exp - shift + 56) / 4;
    let biased = hex_exp + 64;
    if !(0..=127).contains(&biased) {
        return Err(GdsError::RealOutOfRange(value));
    }
    Ok(sign | (biased as u64) << 56 | significand << shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_encodings() {
        assert_eq!(encode(1.0).unwrap(), 0x4110_0000_0000_0000);
        assert_eq!(encode(-1.0).unwrap(), 0xC110_0000_0000_0000);
        assert_eq!(encode(0.0).unwrap(), 0);
        // 1e-3 and 1e-9 as written by common layout tools
        assert_eq!(encode(1e-3).unwrap(), 0x3E41_8937_4BC6_A7F0);
        assert_eq!(encode(1e-9).unwrap(), 0x3944_B82F_A09B_5A54);
        assert_eq!(decode(0x4110_0000_0000_0000), 1.0);
        assert_eq!(decode(0x4220_0000_0000_0000), 32.0);
        assert_eq!(encode(0.5).unwrap(), 0x4080_0000_0000_0000);
        assert_eq!(encode(2.5).unwrap(), 0x4128_0000_0000_0000);
    }

    #[test]
    fn rejects_non_finite_and_huge() {
        assert!(encode(f64::NAN).is_err());
        assert!(encode(f64::INFINITY).is_err());
        assert!(encode(1e300).is_err());
    }

    proptest! {
        #[test]
        fn exact_roundtrip(v in -1e70f64..1e70) {
            prop_assert_eq!(decode(encode(v).unwrap()), v);
        }

        #[test]
        fn exact_roundtrip_small(m in 1u64..(1 << 53), e in -200i32..200) {
            let v = m as f64 * 2f64.powi(e);
            prop_assert_eq!(decode(encode(v).unwrap()), v);
        }
    }
}
