//! Functional radix-2^2 decimation-in-frequency transform.
//!
//! Each level of the recursion splits the working span N into quarters via
//! two butterfly ranks and one rotation rank:
//!
//! * rank 1 pairs samples a stride of span/2 apart: sum and difference;
//! * rank 2 pairs a stride of span/4 apart; in the difference half of
//!   rank 1's output the second element is first rotated by -j, which is a
//!   rail exchange (re, im) -> (im, -re) and costs no arithmetic;
//! * slots then rotate by W_span^(n3*(k1+2*k2)), where (k1, k2) name the
//!   quarter and n3 the offset within it.
//!
//! The recursion continues on span/4 until a span of 4 (no rotation rank)
//! or 2 (a lone rank-1 butterfly) remains. Output lands in bit-reversed
//! index order.
//!
//! Two implementations share this skeleton: a double-precision one used as
//! a structural oracle, and the fixed-point one that models the hardware
//! word level, with optional divide-by-2 after each butterfly rank and
//! rotation via the narrowed-coefficient three-multiply path.

use crate::complex_mult::{TwiddleError, TwiddleRom, cmul3};
use crate::fixedpoint::{self, ComplexFixed, FixedFormat, Rounding};
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FftError {
    #[error("frame length {0} is not a power of two >= 2")]
    BadLength(usize),
    #[error("frame samples do not share one format")]
    MixedFormats,
    #[error("word width would exceed 63 bits during an unscaled pass")]
    WidthExhausted,
    #[error(transparent)]
    Twiddle(#[from] TwiddleError),
}

/// What a frame's samples mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// How a frame's samples are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    BitReversed,
}

/// A block of samples tagged with domain and index order, so comparisons
/// can refuse mismatched interpretations instead of producing garbage.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub samples: Vec<T>,
    pub domain: Domain,
    pub ordering: Ordering,
}

impl<T> Frame<T> {
    pub fn new(samples: Vec<T>, domain: Domain, ordering: Ordering) -> Self {
        Self {
            samples,
            domain,
            ordering,
        }
    }

    /// The common starting point: time-domain samples in natural order.
    pub fn time_natural(samples: Vec<T>) -> Self {
        Self::new(samples, Domain::Time, Ordering::Natural)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `index` with its low `bits` bits reversed.
pub fn bit_reverse(index: usize, bits: u32) -> usize {
    index.reverse_bits() >> (usize::BITS - bits)
}

/// Reorder a frame between natural and bit-reversed indexing. The
/// permutation is its own inverse, so this flips the ordering tag.
pub fn bit_reverse_permute<T: Clone>(frame: &Frame<T>) -> Frame<T> {
    let n = frame.len();
    assert!(n.is_power_of_two() && n >= 2);
    let bits = n.trailing_zeros();
    let samples = (0..n)
        .map(|i| frame.samples[bit_reverse(i, bits)].clone())
        .collect();
    Frame {
        samples,
        domain: frame.domain,
        ordering: match frame.ordering {
            Ordering::Natural => Ordering::BitReversed,
            Ordering::BitReversed => Ordering::Natural,
        },
    }
}

/// Split a time index as n = (N/2)n1 + (N/4)n2 + n3.
pub fn decompose_n(n: usize, len: usize) -> (usize, usize, usize) {
    debug_assert!(n < len && len >= 4);
    let q = len / 4;
    (n / (2 * q), (n / q) % 2, n % q)
}

/// Split a frequency index as k = k1 + 2k2 + 4k3.
pub fn decompose_k(k: usize, len: usize) -> (usize, usize, usize) {
    debug_assert!(k < len && len >= 4);
    (k & 1, (k >> 1) & 1, k >> 2)
}

pub fn recompose_n(parts: (usize, usize, usize), len: usize) -> usize {
    parts.0 * (len / 2) + parts.1 * (len / 4) + parts.2
}

pub fn recompose_k(parts: (usize, usize, usize)) -> usize {
    parts.0 + 2 * parts.1 + 4 * parts.2
}

/// Direct O(N^2) discrete Fourier transform, the arithmetic ground truth.
///
/// Coefficients come from a table indexed by (n*k) mod N so repeated angles
/// are bitwise identical. `scale` multiplies every output bin; pass 1.0 for
/// the textbook transform or 1/N to match a halving datapath.
pub fn dft_direct(x: &[Complex64], scale: f64) -> Vec<Complex64> {
    let n = x.len();
    let table: Vec<Complex64> = (0..n)
        .map(|e| Complex64::from_polar(1.0, -TAU * e as f64 / n as f64))
        .collect();
    (0..n)
        .map(|k| {
            let sum: Complex64 = x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * table[(i * k) % n])
                .sum();
            sum * scale
        })
        .collect()
}

/// Which butterfly ranks divide their outputs by two.
///
/// Halving every rank keeps the word width constant and scales the final
/// spectrum by 1/N; the hardware does exactly this. Disabling halving
/// grows the word one bit per rank and yields the unscaled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingPolicy {
    pub halve_rank1: bool,
    pub halve_rank2: bool,
}

impl Default for ScalingPolicy {
    fn default() -> Self {
        Self {
            halve_rank1: true,
            halve_rank2: true,
        }
    }
}

impl ScalingPolicy {
    /// Overall gain the policy applies to an N-point transform.
    pub fn gain(&self, n: usize) -> f64 {
        let mut g = 1.0;
        let mut span = n;
        while span >= 4 {
            if self.halve_rank1 {
                g *= 0.5;
            }
            if self.halve_rank2 {
                g *= 0.5;
            }
            span /= 4;
        }
        if span == 2 && self.halve_rank1 {
            g *= 0.5;
        }
        g
    }
}

fn check_length(n: usize) -> Result<(), FftError> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(FftError::BadLength(n))
    }
}

/// Double-precision radix-2^2 pass. Input is natural-order time samples;
/// output is the bit-reversed-order spectrum, scaled per `scaling`.
pub fn fft_r22_f64(x: &[Complex64], scaling: ScalingPolicy) -> Result<Vec<Complex64>, FftError> {
    let n = x.len();
    check_length(n)?;
    let mut data = x.to_vec();
    let g1 = if scaling.halve_rank1 { 0.5 } else { 1.0 };
    let g2 = if scaling.halve_rank2 { 0.5 } else { 1.0 };

    let bf = |a: Complex64, b: Complex64, cross: bool, g: f64| -> (Complex64, Complex64) {
        let t = if cross {
            Complex64::new(b.im, -b.re)
        } else {
            b
        };
        ((a + t) * g, (a - t) * g)
    };

    let mut span = n;
    while span >= 4 {
        for base in (0..n).step_by(span) {
            let half = span / 2;
            let quarter = span / 4;
            for i in 0..half {
                let (u, v) = bf(data[base + i], data[base + half + i], false, g1);
                data[base + i] = u;
                data[base + half + i] = v;
            }
            for i in 0..quarter {
                let (u, v) = bf(data[base + i], data[base + quarter + i], false, g2);
                data[base + i] = u;
                data[base + quarter + i] = v;
                let lo = base + half + i;
                let (u, v) = bf(data[lo], data[lo + quarter], true, g2);
                data[lo] = u;
                data[lo + quarter] = v;
            }
            if span >= 8 {
                for q in 0..span {
                    let e = crate::complex_mult::slot_exponent(span, q);
                    if e != 0 {
                        let w = Complex64::from_polar(1.0, -TAU * f64::from(e) / span as f64);
                        data[base + q] *= w;
                    }
                }
            }
        }
        span /= 4;
    }
    if span == 2 {
        for base in (0..n).step_by(2) {
            let (u, v) = bf(data[base], data[base + 1], false, g1);
            data[base] = u;
            data[base + 1] = v;
        }
    }
    Ok(data)
}

/// Knobs for the fixed-point pass. The same set drives the streaming
/// pipeline so the two routes stay comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedFftParams {
    /// ROM narrowing: low bits dropped from each stored coefficient.
    pub rom_shift: u32,
    /// Block width for digit-slicing the rotator's data operand.
    pub bits_per_block: u32,
    pub rounding: Rounding,
    pub scaling: ScalingPolicy,
    /// Route unity coefficients through the rotator instead of bypassing.
    /// The bypass is the default: rotating by the stored approximation of
    /// +1 (which saturates one LSB low) injects a gain error for no work.
    pub rotate_unity: bool,
}

impl FixedFftParams {
    /// Paper-configuration defaults for a 16-bit datapath: coefficients
    /// shifted down 6 bits, 4-bit slicing blocks, round-half-away, both
    /// butterfly ranks halving, unity slots bypassed.
    pub fn default_16bit() -> Self {
        Self {
            rom_shift: 6,
            bits_per_block: 4,
            rounding: Rounding::HalfAwayFromZero,
            scaling: ScalingPolicy::default(),
            rotate_unity: false,
        }
    }
}

/// Fixed-point transform output: bit-reversed spectrum plus how many
/// rotator narrowings clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedFftOutput {
    pub samples: Vec<ComplexFixed>,
    pub saturations: u64,
}

fn uniform_format(x: &[ComplexFixed]) -> Result<FixedFormat, FftError> {
    let fmt = x[0].format();
    if x.iter().all(|s| s.format() == fmt) {
        Ok(fmt)
    } else {
        Err(FftError::MixedFormats)
    }
}

fn bf_fixed(
    a: ComplexFixed,
    b: ComplexFixed,
    cross: bool,
    halve: bool,
    rounding: Rounding,
) -> (ComplexFixed, ComplexFixed) {
    // cross applies -j to b first: (re, im) -> (im, -re). Folding the
    // exchange into the adds avoids ever negating a raw word, so the
    // minimum two's-complement value cannot overflow here.
    let (sum_re, sum_im, diff_re, diff_im) = if cross {
        (
            fixedpoint::add(a.re, b.im),
            fixedpoint::sub(a.im, b.re),
            fixedpoint::sub(a.re, b.im),
            fixedpoint::add(a.im, b.re),
        )
    } else {
        (
            fixedpoint::add(a.re, b.re),
            fixedpoint::add(a.im, b.im),
            fixedpoint::sub(a.re, b.re),
            fixedpoint::sub(a.im, b.im),
        )
    };
    if halve {
        (
            ComplexFixed::new(
                fixedpoint::scale_half_round(sum_re, rounding),
                fixedpoint::scale_half_round(sum_im, rounding),
            ),
            ComplexFixed::new(
                fixedpoint::scale_half_round(diff_re, rounding),
                fixedpoint::scale_half_round(diff_im, rounding),
            ),
        )
    } else {
        (
            ComplexFixed::new(sum_re, sum_im),
            ComplexFixed::new(diff_re, diff_im),
        )
    }
}

/// Fixed-point radix-2^2 pass over natural-order time samples; returns the
/// bit-reversed-order spectrum at the word level the scaling policy leaves.
pub fn fft_r22_fixed(
    x: &[ComplexFixed],
    params: &FixedFftParams,
) -> Result<FixedFftOutput, FftError> {
    let n = x.len();
    check_length(n)?;
    let base_fmt = uniform_format(x)?;

    // One bit of growth per unhalved butterfly rank, plus the transient
    // bit inside the last rank, must stay inside i64.
    let ranks = n.trailing_zeros();
    let growth = (!params.scaling.halve_rank1 as u32 + !params.scaling.halve_rank2 as u32)
        * (ranks / 2)
        + (ranks % 2) * !params.scaling.halve_rank1 as u32;
    if base_fmt.word_bits() + growth + 1 > 64 {
        return Err(FftError::WidthExhausted);
    }

    let mut data = x.to_vec();
    let mut saturations = 0u64;
    let mut span = n;
    while span >= 4 {
        let rom = if span >= 8 {
            Some(TwiddleRom::generate(
                span,
                base_fmt,
                params.rom_shift,
                params.rounding,
            )?)
        } else {
            None
        };
        for base in (0..n).step_by(span) {
            let half = span / 2;
            let quarter = span / 4;
            for i in 0..half {
                let (u, v) = bf_fixed(
                    data[base + i],
                    data[base + half + i],
                    false,
                    params.scaling.halve_rank1,
                    params.rounding,
                );
                data[base + i] = u;
                data[base + half + i] = v;
            }
            for i in 0..quarter {
                let (u, v) = bf_fixed(
                    data[base + i],
                    data[base + quarter + i],
                    false,
                    params.scaling.halve_rank2,
                    params.rounding,
                );
                data[base + i] = u;
                data[base + quarter + i] = v;
                let lo = base + half + i;
                let (u, v) = bf_fixed(
                    data[lo],
                    data[lo + quarter],
                    true,
                    params.scaling.halve_rank2,
                    params.rounding,
                );
                data[lo] = u;
                data[lo + quarter] = v;
            }
            if let Some(rom) = &rom {
                for q in 0..span {
                    let entry = rom.entry(q);
                    if entry.is_unity() && !params.rotate_unity {
                        continue;
                    }
                    let r = cmul3(
                        data[base + q],
                        entry,
                        params.bits_per_block,
                        params.rounding,
                        None,
                    )?;
                    if r.saturated {
                        saturations += 1;
                    }
                    data[base + q] = r.value;
                }
            }
        }
        span /= 4;
    }
    if span == 2 {
        for base in (0..n).step_by(2) {
            let (u, v) = bf_fixed(
                data[base],
                data[base + 1],
                false,
                params.scaling.halve_rank1,
                params.rounding,
            );
            data[base] = u;
            data[base + 1] = v;
        }
    }
    Ok(FixedFftOutput {
        samples: data,
        saturations,
    })
}
