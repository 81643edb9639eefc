//! Three-multiply complex rotation against a narrowed coefficient ROM.
//!
//! Rotation coefficients W^e = exp(-2*pi*j*e/span) are quantized to the
//! datapath format, then arithmetic-right-shifted to drop `shift` low bits
//! before storage. The floor shift keeps every stored component inside
//! (word_bits - shift) signed bits, including the saturated +1.0 case, so
//! the ROM width claim is structural. The dropped bits are compensated in
//! the product: one final rounding by (frac_bits - shift) lands the result
//! back in the datapath format.
//!
//! The rotator itself spends exactly three shift-add multiplies per sample:
//!
//!   re = wr*(ar - ai) + ai*(wr - wi)
//!   im = wi*(ar + ai) + ai*(wr - wi)
//!
//! with the third product shared. The pre-adds grow the data operand one
//! bit; it is then sliced at the next multiple of the block width. Both
//! products feeding an output rail are exact integers, so the single final
//! rounding makes the three-multiply form bit-identical to the direct
//! four-multiply form.

use crate::digit_slicing::{self, FaultSpec, SliceConfig, SliceError};
use crate::fixedpoint::{ComplexFixed, Fixed, FixedFormat, Rounding, quantize};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TwiddleError {
    #[error("span {0} must be a power of two >= 8 for a rotation stage")]
    BadSpan(usize),
    #[error("shift {shift} leaves no usable coefficient width in {word_bits}-bit words")]
    BadShift { shift: u32, word_bits: u32 },
    #[error(transparent)]
    Slice(#[from] SliceError),
}

/// One ROM entry: the narrowed coefficient plus the exact value it encodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwiddleEntry {
    exponent: u32,
    span: u32,
    stored_re: i64,
    stored_im: i64,
    /// stored_re - stored_im, precomputed for the shared third multiply.
    stored_diff: i64,
    exact_re: f64,
    exact_im: f64,
    format: FixedFormat,
    shift: u32,
}

impl TwiddleEntry {
    fn generate(
        exponent: u32,
        span: u32,
        format: FixedFormat,
        shift: u32,
        rounding: Rounding,
    ) -> Self {
        let angle = -TAU * f64::from(exponent) / f64::from(span);
        let exact_re = angle.cos();
        let exact_im = angle.sin();
        let stored_re = quantize(exact_re, format, rounding).value.raw() >> shift;
        let stored_im = quantize(exact_im, format, rounding).value.raw() >> shift;
        Self {
            exponent,
            span,
            stored_re,
            stored_im,
            stored_diff: stored_re - stored_im,
            exact_re,
            exact_im,
            format,
            shift,
        }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn span(&self) -> u32 {
        self.span
    }

    pub fn stored_re(&self) -> i64 {
        self.stored_re
    }

    pub fn stored_im(&self) -> i64 {
        self.stored_im
    }

    /// Exact coefficient this entry approximates.
    pub fn exact(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.exact_re, self.exact_im)
    }

    /// Width of the stored components in signed bits.
    pub fn stored_bits(&self) -> u32 {
        self.format.word_bits() - self.shift
    }

    /// True when the coefficient is exactly 1 and rotation is a no-op a
    /// stage may bypass.
    pub fn is_unity(&self) -> bool {
        self.exponent == 0
    }
}

/// Per-stage coefficient ROM, one entry per stream slot of a span block.
#[derive(Debug, Clone)]
pub struct TwiddleRom {
    span: usize,
    format: FixedFormat,
    shift: u32,
    entries: Vec<TwiddleEntry>,
}

/// Rotation exponent fed to stream slot `q` of a span block.
///
/// The block is four quarters; the quarter index m = 2*k1 + k2 and the
/// offset n3 within it give exponent n3 * (k1 + 2*k2).
pub fn slot_exponent(span: usize, q: usize) -> u32 {
    debug_assert!(q < span);
    let quarter = span / 4;
    let m = q / quarter;
    let n3 = (q % quarter) as u32;
    let k1 = (m >> 1) as u32;
    let k2 = (m & 1) as u32;
    n3 * (k1 + 2 * k2)
}

impl TwiddleRom {
    /// Build the ROM for a rotation stage working across `span` samples.
    pub fn generate(
        span: usize,
        format: FixedFormat,
        shift: u32,
        rounding: Rounding,
    ) -> Result<Self, TwiddleError> {
        if span < 8 || !span.is_power_of_two() {
            return Err(TwiddleError::BadSpan(span));
        }
        if shift > format.frac_bits() || format.word_bits() - shift < 2 {
            return Err(TwiddleError::BadShift {
                shift,
                word_bits: format.word_bits(),
            });
        }
        let entries = (0..span)
            .map(|q| {
                TwiddleEntry::generate(slot_exponent(span, q), span as u32, format, shift, rounding)
            })
            .collect();
        Ok(Self {
            span,
            format,
            shift,
            entries,
        })
    }

    /// ROM for rotation stage `stage_index` (0-based) of an `n`-point
    /// transform: the stage spans n >> (2 * stage_index) samples.
    pub fn for_stage(
        n: usize,
        stage_index: usize,
        format: FixedFormat,
        shift: u32,
        rounding: Rounding,
    ) -> Result<Self, TwiddleError> {
        let span = n >> (2 * stage_index);
        Self::generate(span, format, shift, rounding)
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn format(&self) -> FixedFormat {
        self.format
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn entries(&self) -> &[TwiddleEntry] {
        &self.entries
    }

    /// Entry for a stream position; positions wrap by span, matching how
    /// the hardware ROM is addressed by the running sample counter.
    pub fn entry(&self, position: usize) -> &TwiddleEntry {
        &self.entries[position % self.span]
    }
}

/// A rotated sample plus whether either rail clipped on output narrowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotateResult {
    pub value: ComplexFixed,
    pub saturated: bool,
}

fn slice_layout(bits: u32, bits_per_block: u32) -> Result<SliceConfig, SliceError> {
    let blocks = bits.div_ceil(bits_per_block);
    SliceConfig::new(blocks, bits_per_block)
}

/// Rotate `a` by the entry's coefficient using three shift-add multiplies.
///
/// `fault`, when set, corrupts one sliced bit of the first multiply's data
/// operand; `None` is the clean path.
pub fn cmul3(
    a: ComplexFixed,
    w: &TwiddleEntry,
    bits_per_block: u32,
    rounding: Rounding,
    fault: Option<FaultSpec>,
) -> Result<RotateResult, TwiddleError> {
    let fmt = a.format();
    // The final rounding assumes the sample carries the ROM's fraction
    // length; word width may differ (unscaled passes grow it).
    assert_eq!(
        fmt.frac_bits(),
        w.format.frac_bits(),
        "sample and coefficient fraction lengths must match"
    );
    let ar = a.re.raw();
    let ai = a.im.raw();
    let coeff_bits = w.stored_bits();

    // Pre-adds grow one bit; slice at the next block boundary.
    let grown = slice_layout(fmt.word_bits() + 1, bits_per_block)?;
    let base = slice_layout(fmt.word_bits(), bits_per_block)?;

    let m1 = digit_slicing::shift_add_multiply_faulty(ar - ai, grown, w.stored_re, coeff_bits, fault)?;
    let m2 = digit_slicing::shift_add_multiply(ar + ai, grown, w.stored_im, coeff_bits)?;
    let m3 = digit_slicing::shift_add_multiply(ai, base, w.stored_diff, coeff_bits + 1)?;

    finish_rotation(m1 + m3, m2 + m3, fmt, w.shift, rounding)
}

/// Direct four-multiply rotation oracle using native integer products.
///
/// Shares the narrowing and rounding of [`cmul3`]; the two must agree bit
/// for bit because both sum exact integer products before the one rounding.
pub fn cmul4_direct(
    a: ComplexFixed,
    w: &TwiddleEntry,
    rounding: Rounding,
) -> Result<RotateResult, TwiddleError> {
    let fmt = a.format();
    assert_eq!(fmt.frac_bits(), w.format.frac_bits());
    let ar = a.re.raw();
    let ai = a.im.raw();
    let re = ar * w.stored_re - ai * w.stored_im;
    let im = ar * w.stored_im + ai * w.stored_re;
    finish_rotation(re, im, fmt, w.shift, rounding)
}

fn finish_rotation(
    re_wide: i64,
    im_wide: i64,
    fmt: FixedFormat,
    shift: u32,
    rounding: Rounding,
) -> Result<RotateResult, TwiddleError> {
    // Products carry frac + (frac - shift) fraction bits; one rounding by
    // (frac - shift) returns to the datapath format.
    let down = fmt.frac_bits() - shift;
    let re = Fixed::from_raw_saturating(rounding.shift_right(re_wide, down), fmt);
    let im = Fixed::from_raw_saturating(rounding.shift_right(im_wide, down), fmt);
    Ok(RotateResult {
        value: ComplexFixed::new(re.value, im.value),
        saturated: re.saturated || im.saturated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::with_counting;
    use proptest::prelude::*;

    fn q15() -> FixedFormat {
        FixedFormat::q1_15()
    }

    fn rom8() -> TwiddleRom {
        TwiddleRom::generate(8, q15(), 6, Rounding::HalfAwayFromZero).unwrap()
    }

    #[test]
    fn span8_slot_schedule() {
        let exps: Vec<u32> = (0..8).map(|q| slot_exponent(8, q)).collect();
        assert_eq!(exps, [0, 0, 0, 2, 0, 1, 0, 3]);
    }

    #[test]
    fn first_quarter_slots_are_unity() {
        for span in [8usize, 16, 64, 256] {
            for q in 0..span / 4 {
                assert_eq!(slot_exponent(span, q), 0);
            }
            // First slot of every other quarter is unity too (n3 = 0).
            for m in 1..4 {
                assert_eq!(slot_exponent(span, m * span / 4), 0);
            }
        }
    }

    #[test]
    fn span8_stored_values() {
        let rom = rom8();
        let stored: Vec<(i64, i64)> = rom
            .entries()
            .iter()
            .map(|e| (e.stored_re(), e.stored_im()))
            .collect();
        // Exponents [0,0,0,2,0,1,0,3]; floor shift by 6 from Q1.15.
        assert_eq!(stored[0], (511, 0));
        assert_eq!(stored[3], (0, -512));
        assert_eq!(stored[5], (362, -363));
        assert_eq!(stored[7], (-363, -363));
        assert!(rom.entries()[0].is_unity());
        assert!(!rom.entries()[5].is_unity());
    }

    #[test]
    fn stored_values_fit_width() {
        for (wb, fb, shift) in [(16u32, 15u32, 6u32), (16, 15, 0), (12, 11, 4), (10, 9, 3)] {
            let fmt = FixedFormat::new(wb, fb).unwrap();
            for span in [8usize, 16, 64] {
                let rom =
                    TwiddleRom::generate(span, fmt, shift, Rounding::HalfAwayFromZero).unwrap();
                let lo = -(1i64 << (wb - shift - 1));
                let hi = (1i64 << (wb - shift - 1)) - 1;
                for e in rom.entries() {
                    assert!(
                        e.stored_re() >= lo && e.stored_re() <= hi,
                        "re {} outside {}-bit range",
                        e.stored_re(),
                        wb - shift
                    );
                    assert!(e.stored_im() >= lo && e.stored_im() <= hi);
                }
            }
        }
    }

    #[test]
    fn rom_rejects_bad_parameters() {
        let f = q15();
        let r = Rounding::HalfAwayFromZero;
        assert!(matches!(
            TwiddleRom::generate(4, f, 6, r),
            Err(TwiddleError::BadSpan(4))
        ));
        assert!(matches!(
            TwiddleRom::generate(12, f, 6, r),
            Err(TwiddleError::BadSpan(12))
        ));
        assert!(matches!(
            TwiddleRom::generate(8, f, 16, r),
            Err(TwiddleError::BadShift { .. })
        ));
        assert!(matches!(
            TwiddleRom::generate(8, f, 15, r),
            Err(TwiddleError::BadShift { .. })
        ));
    }

    #[test]
    fn rotation_anchor() {
        // (0.5 + 0.25j) rotated by W_8^1 with the narrowed coefficient.
        let rom = rom8();
        let a = ComplexFixed::quantize(0.5, 0.25, q15(), Rounding::HalfAwayFromZero);
        let w = rom.entry(5);
        let r = cmul3(a, w, 4, Rounding::HalfAwayFromZero, None).unwrap();
        let exact = a.to_complex64() * w.exact();
        let err_re = (r.value.re.to_real() - exact.re).abs();
        let err_im = (r.value.im.to_real() - exact.im).abs();
        assert!(!r.saturated);
        // Coefficient narrowing dominates: within 3 * 2^shift raw steps.
        let tol = 3.0 * 64.0 * q15().lsb();
        assert!(err_re < tol, "err_re {err_re}");
        assert!(err_im < tol, "err_im {err_im}");
    }

    #[test]
    fn rotation_saturates_on_corner() {
        // (-1 - j) rotated by W_8^1 lands near -sqrt(2) on the real rail.
        let rom = rom8();
        let a = ComplexFixed::new(
            Fixed::from_raw(-32768, q15()),
            Fixed::from_raw(-32768, q15()),
        );
        let w = rom.entry(5);
        let r = cmul3(a, w, 4, Rounding::HalfAwayFromZero, None).unwrap();
        assert!(r.saturated);
        assert_eq!(r.value.re.raw(), -32768);
        assert_eq!(r.value.im.raw(), 64);
    }

    #[test]
    fn three_multiplies_per_rotation() {
        let rom = rom8();
        let a = ComplexFixed::quantize(0.3, -0.6, q15(), Rounding::HalfAwayFromZero);
        let (_, counts) = with_counting(|| {
            cmul3(a, rom.entry(5), 4, Rounding::HalfAwayFromZero, None).unwrap()
        });
        assert_eq!(counts.multiplies, 3);
        let (_, counts) =
            with_counting(|| cmul4_direct(a, rom.entry(5), Rounding::HalfAwayFromZero));
        assert_eq!(counts.multiplies, 0);
    }

    #[test]
    fn fault_perturbs_rotation() {
        let rom = rom8();
        let a = ComplexFixed::quantize(0.5, 0.25, q15(), Rounding::HalfAwayFromZero);
        let w = rom.entry(5);
        let clean = cmul3(a, w, 4, Rounding::HalfAwayFromZero, None).unwrap();
        // ar - ai = 8192 = 0x2000: bit 1 of block 3 is its only set bit.
        let fault = FaultSpec { block: 3, bit: 1 };
        let faulty = cmul3(a, w, 4, Rounding::HalfAwayFromZero, Some(fault)).unwrap();
        assert_ne!(clean.value.re.raw(), faulty.value.re.raw());
        // The fault sits in the real-rail multiply; imaginary is untouched.
        assert_eq!(clean.value.im.raw(), faulty.value.im.raw());
    }

    proptest! {
        #[test]
        fn cmul3_matches_direct_form(
            ar in -32768i64..=32767,
            ai in -32768i64..=32767,
            slot in 0usize..8,
        ) {
            let rom = rom8();
            let a = ComplexFixed::new(
                Fixed::from_raw(ar, q15()),
                Fixed::from_raw(ai, q15()),
            );
            let w = rom.entry(slot);
            for mode in [Rounding::HalfAwayFromZero, Rounding::Truncate] {
                let lhs = cmul3(a, w, 4, mode, None).unwrap();
                let rhs = cmul4_direct(a, w, mode).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn cmul3_tracks_exact_rotation(
            ar in -16384i64..=16383,
            ai in -16384i64..=16383,
            slot in 0usize..8,
        ) {
            // Inputs bounded away from the rails so nothing saturates.
            let rom = rom8();
            let a = ComplexFixed::new(
                Fixed::from_raw(ar, q15()),
                Fixed::from_raw(ai, q15()),
            );
            let w = rom.entry(slot);
            let r = cmul3(a, w, 4, Rounding::HalfAwayFromZero, None).unwrap();
            prop_assert!(!r.saturated);
            let exact = a.to_complex64() * w.exact();
            let tol = 3.0 * 64.0 * q15().lsb();
            prop_assert!((r.value.re.to_real() - exact.re).abs() < tol);
            prop_assert!((r.value.im.to_real() - exact.im).abs() < tol);
        }
    }
}
