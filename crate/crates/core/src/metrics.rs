//! Error measurement between computation routes.
//!
//! The reference side is always double precision; the candidate side is
//! whatever the fixed datapath produced, widened back to doubles. Frames
//! carry domain and ordering tags, and comparison refuses mismatched tags:
//! comparing a bit-reversed spectrum against a natural-order one produces
//! numbers, but never meaningful ones.

use crate::fixedpoint::ComplexFixed;
use crate::radix22::{Frame, bit_reverse_permute, dft_direct};
use crate::sdf_pipeline::{PipelineConfig, PipelineError, SdfPipeline};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("frames are in different domains")]
    DomainMismatch,
    #[error("frames are in different index orders")]
    OrderingMismatch,
    #[error("frame lengths differ: {reference} vs {candidate}")]
    LengthMismatch { reference: usize, candidate: usize },
    #[error("cannot measure error against an empty frame")]
    EmptyFrame,
    #[error("reference signal has zero energy; ratio undefined")]
    ZeroSignal,
    #[error("word width {0} is not usable for a sweep point")]
    BadWordWidth(u32),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Pointwise error measurements of a candidate against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub len: usize,
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Signal-to-quantization-noise ratio in dB; infinite when the error
    /// is exactly zero.
    pub sqnr_db: f64,
    pub signal_energy: f64,
    pub error_energy: f64,
}

/// Measure a candidate slice against a reference slice of equal length.
pub fn error_stats(
    reference: &[Complex64],
    candidate: &[Complex64],
) -> Result<ErrorReport, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyFrame);
    }
    if reference.len() != candidate.len() {
        return Err(MetricsError::LengthMismatch {
            reference: reference.len(),
            candidate: candidate.len(),
        });
    }
    let signal_energy: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
    if signal_energy == 0.0 {
        return Err(MetricsError::ZeroSignal);
    }
    let mut error_energy = 0.0;
    let mut max_abs_error: f64 = 0.0;
    for (r, c) in reference.iter().zip(candidate) {
        let e = (r - c).norm_sqr();
        error_energy += e;
        max_abs_error = max_abs_error.max(e.sqrt());
    }
    let len = reference.len();
    Ok(ErrorReport {
        len,
        max_abs_error,
        rms_error: (error_energy / len as f64).sqrt(),
        sqnr_db: if error_energy == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (signal_energy / error_energy).log10()
        },
        signal_energy,
        error_energy,
    })
}

/// Compare a fixed-point frame against a double-precision reference frame.
///
/// Tags must agree in both domain and ordering. `candidate_scale`
/// multiplies each candidate value first, to align a gain difference the
/// caller knows about (for example comparing a halving datapath against an
/// unscaled reference).
pub fn compare(
    reference: &Frame<Complex64>,
    candidate: &Frame<ComplexFixed>,
    candidate_scale: f64,
) -> Result<ErrorReport, MetricsError> {
    if reference.domain != candidate.domain {
        return Err(MetricsError::DomainMismatch);
    }
    if reference.ordering != candidate.ordering {
        return Err(MetricsError::OrderingMismatch);
    }
    let widened: Vec<Complex64> = candidate
        .samples
        .iter()
        .map(|s| s.to_complex64() * candidate_scale)
        .collect();
    error_stats(&reference.samples, &widened)
}

/// Pooled accuracy of a pipeline over a random corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqnrSummary {
    pub n: usize,
    pub frames: usize,
    /// Ratio of pooled reference energy to pooled error energy, in dB.
    pub sqnr_db: f64,
    pub max_abs_error: f64,
    pub saturations: u64,
}

/// Deterministic random corpus: `frames` frames of `n` complex samples,
/// uniform on [-amplitude, amplitude) per rail.
pub fn random_corpus(n: usize, frames: usize, amplitude: f64, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|_| {
            (0..n)
                .map(|_| {
                    Complex64::new(
                        rng.gen_range(-amplitude..amplitude),
                        rng.gen_range(-amplitude..amplitude),
                    )
                })
                .collect()
        })
        .collect()
}

/// Run a pipeline over a seeded corpus and measure it against the direct
/// transform of the exact samples it consumed.
///
/// The reference is the double-precision transform of the corpus *after*
/// input quantization, scaled by the datapath's own gain, so the measured
/// error is the datapath's alone: coefficient narrowing, rounding, and any
/// clipping, not the unavoidable input quantization.
pub fn pipeline_sqnr(
    config: PipelineConfig,
    seed: u64,
    frames: usize,
    amplitude: f64,
) -> Result<SqnrSummary, MetricsError> {
    let n = config.n;
    let corpus = random_corpus(n, frames, amplitude, seed);
    let quantized: Vec<Vec<ComplexFixed>> = corpus
        .iter()
        .map(|f| {
            f.iter()
                .map(|v| {
                    ComplexFixed::quantize(v.re, v.im, config.format, config.fft.rounding)
                })
                .collect()
        })
        .collect();

    let mut pipeline = SdfPipeline::new(config)?;
    let result = pipeline.run_frames(&quantized, None)?;

    let gain = config.fft.scaling.gain(n);
    let mut signal_energy = 0.0;
    let mut error_energy = 0.0;
    let mut max_abs_error: f64 = 0.0;
    for (inputs, out) in quantized.iter().zip(&result.frames) {
        let exact_in: Vec<Complex64> = inputs.iter().map(|s| s.to_complex64()).collect();
        let reference = Frame::new(
            dft_direct(&exact_in, gain),
            crate::radix22::Domain::Frequency,
            crate::radix22::Ordering::Natural,
        );
        let natural = bit_reverse_permute(out);
        let report = compare(&reference, &natural, 1.0)?;
        signal_energy += report.signal_energy;
        error_energy += report.error_energy;
        max_abs_error = max_abs_error.max(report.max_abs_error);
    }
    Ok(SqnrSummary {
        n,
        frames,
        sqnr_db: if error_energy == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (signal_energy / error_energy).log10()
        },
        max_abs_error,
        saturations: result.saturations,
    })
}

/// Widest slicing block in {4, 3, 2, 1} that divides a word width evenly.
pub fn block_width_for(word_bits: u32) -> u32 {
    [4u32, 3, 2]
        .into_iter()
        .find(|p| word_bits.is_multiple_of(*p))
        .unwrap_or(1)
}

/// One measured point of a word-width sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub word_bits: u32,
    pub sqnr_db: f64,
    pub max_abs_error: f64,
    pub saturations: u64,
}

/// Measure SQNR at each word width, same corpus seed throughout.
///
/// Every width keeps the architecture constants (coefficient shift,
/// multiplier depth, scaling) and adapts only the word-dependent knobs:
/// fraction length is width minus one and the slicing block is the widest
/// even divisor. The corpus reals are identical across widths; each width
/// quantizes them at its own precision.
pub fn width_sweep(
    base: PipelineConfig,
    word_bits: impl IntoIterator<Item = u32>,
    seed: u64,
    frames: usize,
    amplitude: f64,
) -> Result<Vec<SweepPoint>, MetricsError> {
    let mut points = Vec::new();
    for wb in word_bits {
        if wb < 2 {
            return Err(MetricsError::BadWordWidth(wb));
        }
        let format = crate::fixedpoint::FixedFormat::new(wb, wb - 1)
            .map_err(|_| MetricsError::BadWordWidth(wb))?;
        let config = PipelineConfig {
            format,
            fft: crate::radix22::FixedFftParams {
                bits_per_block: block_width_for(wb),
                ..base.fft
            },
            ..base
        };
        let summary = pipeline_sqnr(config, seed, frames, amplitude)?;
        points.push(SweepPoint {
            word_bits: wb,
            sqnr_db: summary.sqnr_db,
            max_abs_error: summary.max_abs_error,
            saturations: summary.saturations,
        });
    }
    Ok(points)
}
