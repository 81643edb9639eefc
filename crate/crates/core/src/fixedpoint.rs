//! Two's-complement fixed-point scalars and complex pairs.
//!
//! Everything the datapath computes is built on [`Fixed`]: a raw signed
//! integer plus a [`FixedFormat`] giving word and fraction lengths. Additions
//! and subtractions widen by one bit and are always exact; the only lossy
//! operations are [`quantize`] (real -> fixed), [`scale_half_round`] (the
//! divide-by-2 that undoes butterfly growth) and saturating narrowing.

use thiserror::Error;

/// Word layout of a fixed-point value: total bits and fraction bits.
///
/// The default datapath format is 16-bit words with 15 fraction bits
/// (Q1.15), covering [-1.0, 1.0 - 2^-15].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedFormat {
    word_bits: u32,
    frac_bits: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("word_bits {0} outside supported range 2..=64")]
    WordBits(u32),
    #[error("frac_bits {frac} must be <= word_bits - 1 ({word})")]
    FracBits { word: u32, frac: u32 },
}

impl FixedFormat {
    pub fn new(word_bits: u32, frac_bits: u32) -> Result<Self, FormatError> {
        if !(2..=64).contains(&word_bits) {
            return Err(FormatError::WordBits(word_bits));
        }
        if frac_bits > word_bits - 1 {
            return Err(FormatError::FracBits {
                word: word_bits,
                frac: frac_bits,
            });
        }
        Ok(Self {
            word_bits,
            frac_bits,
        })
    }

    /// The paper-default Q1.15 layout.
    pub fn q1_15() -> Self {
        Self {
            word_bits: 16,
            frac_bits: 15,
        }
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Smallest representable raw value, -2^(word_bits-1).
    pub fn min_raw(&self) -> i64 {
        if self.word_bits == 64 {
            i64::MIN
        } else {
            -(1i64 << (self.word_bits - 1))
        }
    }

    /// Largest representable raw value, 2^(word_bits-1) - 1.
    pub fn max_raw(&self) -> i64 {
        if self.word_bits == 64 {
            i64::MAX
        } else {
            (1i64 << (self.word_bits - 1)) - 1
        }
    }

    /// Same fraction length, one more word bit. Holds any single add or
    /// subtract of two values in `self` without loss.
    pub fn widened(&self) -> Self {
        assert!(self.word_bits < 64, "cannot widen a 64-bit format");
        Self {
            word_bits: self.word_bits + 1,
            frac_bits: self.frac_bits,
        }
    }

    /// Real value of one least-significant step, 2^(-frac_bits).
    pub fn lsb(&self) -> f64 {
        2f64.powi(-(self.frac_bits as i32))
    }
}

/// Rounding discipline for the lossy operations.
///
/// `Truncate` drops the discarded bits (an arithmetic right shift, rounding
/// toward negative infinity), which is what a bare hardware shifter does.
/// `HalfAwayFromZero` adds the carry-in rounding used by DSP adders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    HalfAwayFromZero,
    Truncate,
}

impl Rounding {
    /// Round `value / 2^shift` to an integer under this mode.
    pub fn shift_right(&self, value: i64, shift: u32) -> i64 {
        if shift == 0 {
            return value;
        }
        match self {
            Rounding::Truncate => value >> shift,
            Rounding::HalfAwayFromZero => {
                let half = 1i64 << (shift - 1);
                if value >= 0 {
                    (value + half) >> shift
                } else {
                    -((-value + half) >> shift)
                }
            }
        }
    }
}

/// A fixed-point scalar: raw two's-complement integer plus its format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixed {
    raw: i64,
    format: FixedFormat,
}

/// Result of an operation that may have clipped to the format limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub value: Fixed,
    pub saturated: bool,
}

impl Fixed {
    /// Construct from a raw value known to be in range.
    ///
    /// Panics if `raw` is outside the format's two's-complement range; use
    /// [`Fixed::from_raw_saturating`] when clipping is the intended policy.
    pub fn from_raw(raw: i64, format: FixedFormat) -> Self {
        assert!(
            raw >= format.min_raw() && raw <= format.max_raw(),
            "raw {} out of range for {}-bit format",
            raw,
            format.word_bits
        );
        Self { raw, format }
    }

    /// Construct from a raw value, clipping to the format range and
    /// reporting whether clipping happened.
    pub fn from_raw_saturating(raw: i64, format: FixedFormat) -> Quantized {
        let (clipped, saturated) = if raw < format.min_raw() {
            (format.min_raw(), true)
        } else if raw > format.max_raw() {
            (format.max_raw(), true)
        } else {
            (raw, false)
        };
        Quantized {
            value: Self {
                raw: clipped,
                format,
            },
            saturated,
        }
    }

    pub fn zero(format: FixedFormat) -> Self {
        Self { raw: 0, format }
    }

    pub fn raw(&self) -> i64 {
        self.raw
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    /// Real value represented: raw * 2^(-frac_bits).
    ///
    /// Exact as long as word_bits <= 53; wider values may lose low bits in
    /// the conversion. The datapath itself never routes through f64.
    pub fn to_real(&self) -> f64 {
        self.raw as f64 * self.format.lsb()
    }

    /// Lossless reinterpretation in a wider word with the same fraction
    /// length.
    pub fn widen_to(&self, format: FixedFormat) -> Self {
        assert!(format.word_bits >= self.format.word_bits);
        assert_eq!(format.frac_bits, self.format.frac_bits);
        Self {
            raw: self.raw,
            format,
        }
    }
}

/// Round a real value into the format, saturating out-of-range inputs.
pub fn quantize(value: f64, format: FixedFormat, rounding: Rounding) -> Quantized {
    let scaled = value * 2f64.powi(format.frac_bits as i32);
    let rounded = match rounding {
        Rounding::HalfAwayFromZero => scaled.round(),
        Rounding::Truncate => scaled.floor(),
    };
    if rounded < format.min_raw() as f64 {
        Quantized {
            value: Fixed::from_raw(format.min_raw(), format),
            saturated: true,
        }
    } else if rounded > format.max_raw() as f64 {
        Quantized {
            value: Fixed::from_raw(format.max_raw(), format),
            saturated: true,
        }
    } else {
        Quantized {
            value: Fixed::from_raw(rounded as i64, format),
            saturated: false,
        }
    }
}

/// Exact sum in a one-bit-wider format. Never rounds, never overflows.
pub fn add(a: Fixed, b: Fixed) -> Fixed {
    assert_eq!(a.format, b.format, "add operands must share a format");
    Fixed::from_raw(a.raw + b.raw, a.format.widened())
}

/// Exact difference in a one-bit-wider format.
pub fn sub(a: Fixed, b: Fixed) -> Fixed {
    assert_eq!(a.format, b.format, "sub operands must share a format");
    Fixed::from_raw(a.raw - b.raw, a.format.widened())
}

/// Halve a one-bit-grown value back into the base format.
///
/// The result is within half an LSB of the true quotient for every input.
/// The single raw pattern 2^word_bits - 1 would round away-from-zero to one
/// past the top of the base range; it clips to max_raw, which still meets
/// the half-LSB bound.
pub fn scale_half_round(a: Fixed, rounding: Rounding) -> Fixed {
    let target = FixedFormat {
        word_bits: a.format.word_bits - 1,
        frac_bits: a.format.frac_bits,
    };
    let halved = rounding.shift_right(a.raw, 1);
    Fixed::from_raw_saturating(halved, target).value
}

/// Exact two's-complement negation; the minimum raw value clips to max_raw
/// with the saturation flag set.
pub fn negate(a: Fixed) -> Quantized {
    Fixed::from_raw_saturating(-a.raw, a.format)
}

/// A complex sample: real and imaginary parts in the same format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexFixed {
    pub re: Fixed,
    pub im: Fixed,
}

impl ComplexFixed {
    pub fn new(re: Fixed, im: Fixed) -> Self {
        assert_eq!(re.format(), im.format(), "parts must share a format");
        Self { re, im }
    }

    pub fn zero(format: FixedFormat) -> Self {
        Self {
            re: Fixed::zero(format),
            im: Fixed::zero(format),
        }
    }

    pub fn format(&self) -> FixedFormat {
        self.re.format()
    }

    /// Quantize both parts of a real/imaginary pair.
    pub fn quantize(re: f64, im: f64, format: FixedFormat, rounding: Rounding) -> Self {
        Self {
            re: quantize(re, format, rounding).value,
            im: quantize(im, format, rounding).value,
        }
    }

    pub fn to_complex64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_real(), self.im.to_real())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q15() -> FixedFormat {
        FixedFormat::q1_15()
    }

    #[test]
    fn format_bounds() {
        assert!(FixedFormat::new(1, 0).is_err());
        assert!(FixedFormat::new(65, 0).is_err());
        assert!(FixedFormat::new(16, 16).is_err());
        let f = FixedFormat::new(16, 15).unwrap();
        assert_eq!(f.min_raw(), -32768);
        assert_eq!(f.max_raw(), 32767);
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.0, q15(), Rounding::default()).value.raw(), 0);
        let low = quantize(-1.0, q15(), Rounding::default());
        assert_eq!(low.value.raw(), -32768);
        assert!(!low.saturated);
        let irr = quantize(std::f64::consts::FRAC_1_SQRT_2, q15(), Rounding::default());
        assert_eq!(irr.value.raw(), 23170);
        // +1.0 is one LSB past the top of Q1.15.
        let top = quantize(1.0, q15(), Rounding::default());
        assert_eq!(top.value.raw(), 32767);
        assert!(top.saturated);
    }

    #[test]
    fn add_grows_exactly() {
        let half = quantize(0.5, q15(), Rounding::default()).value;
        let quarter = quantize(0.25, q15(), Rounding::default()).value;
        let sum = add(half, quarter);
        assert_eq!(sum.format().word_bits(), 17);
        assert_eq!(sum.raw(), 16384 + 8192);
        assert!((sum.to_real() - 0.75).abs() < 1e-12);

        let neg_one = quantize(-1.0, q15(), Rounding::default()).value;
        let two_low = add(neg_one, neg_one);
        assert_eq!(two_low.raw(), -65536);
        assert!((two_low.to_real() - -2.0).abs() < 1e-12);

        let r = quantize(0.70709, q15(), Rounding::default()).value;
        assert_eq!(add(r, r).raw(), 46340);
    }

    #[test]
    fn scale_half_round_examples() {
        let wide = q15().widened();
        let mk = |raw| Fixed::from_raw(raw, wide);
        assert_eq!(scale_half_round(mk(2), Rounding::HalfAwayFromZero).raw(), 1);
        assert_eq!(scale_half_round(mk(3), Rounding::HalfAwayFromZero).raw(), 2);
        assert_eq!(
            scale_half_round(mk(-3), Rounding::HalfAwayFromZero).raw(),
            -2
        );
        assert_eq!(scale_half_round(mk(3), Rounding::Truncate).raw(), 1);
        assert_eq!(scale_half_round(mk(-3), Rounding::Truncate).raw(), -2);
    }

    #[test]
    fn scale_half_round_error_bound_exhaustive() {
        // All 17-bit inputs, both modes: |result - a/2| <= half an LSB.
        let wide = q15().widened();
        for raw in wide.min_raw()..=wide.max_raw() {
            let a = Fixed::from_raw(raw, wide);
            for mode in [Rounding::HalfAwayFromZero, Rounding::Truncate] {
                let out = scale_half_round(a, mode);
                let err = (out.raw() as f64) - (raw as f64) / 2.0;
                assert!(
                    err.abs() <= 0.5,
                    "raw {raw} mode {mode:?} err {err}",
                );
            }
        }
    }

    #[test]
    fn negate_examples() {
        let z = Fixed::zero(q15());
        assert_eq!(negate(z).value.raw(), 0);
        let half = quantize(0.5, q15(), Rounding::default()).value;
        assert_eq!(negate(half).value.raw(), -16384);
        let bottom = Fixed::from_raw(-32768, q15());
        let n = negate(bottom);
        assert!(n.saturated);
        assert_eq!(n.value.raw(), 32767);
    }

    #[test]
    fn negate_involution_sweep() {
        // Exhaustive at 16-bit: negate(negate(x)) == x except at min_raw.
        let fmt = q15();
        let mut saturations = 0u32;
        for raw in fmt.min_raw()..=fmt.max_raw() {
            let x = Fixed::from_raw(raw, fmt);
            let n = negate(x);
            if n.saturated {
                saturations += 1;
                continue;
            }
            assert_eq!(negate(n.value).value.raw(), raw);
        }
        assert_eq!(saturations, 1);
    }

    #[test]
    fn quantize_roundtrip_exhaustive() {
        let fmt = q15();
        for raw in fmt.min_raw()..=fmt.max_raw() {
            let x = Fixed::from_raw(raw, fmt);
            let back = quantize(x.to_real(), fmt, Rounding::HalfAwayFromZero);
            assert_eq!(back.value.raw(), raw);
            assert!(!back.saturated);
        }
    }

    #[test]
    fn truncate_quantize_floors() {
        let t = quantize(std::f64::consts::FRAC_1_SQRT_2, q15(), Rounding::Truncate);
        assert_eq!(t.value.raw(), 23170); // floor(23170.47)
        let t = quantize(-std::f64::consts::FRAC_1_SQRT_2, q15(), Rounding::Truncate);
        assert_eq!(t.value.raw(), -23171);
    }
}
