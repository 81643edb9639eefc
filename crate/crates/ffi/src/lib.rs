//! C interface to the pipelined transform model.
//!
//! The generated header lives at `include/slicefft.h`. Every function is
//! panic-safe: a panic inside the library surfaces as
//! `SLICEFFT_STATUS_PANIC` instead of unwinding across the boundary.
//! Handles returned by `slicefft_pipeline_new` must be released with
//! `slicefft_pipeline_free`.

use slicefft::fixedpoint::{ComplexFixed, FixedFormat, Rounding};
use slicefft::radix22::{bit_reverse_permute, dft_direct, FixedFftParams, ScalingPolicy};
use slicefft::sdf_pipeline::{PipelineConfig, SdfPipeline};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlicefftStatus {
    /// Call completed.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// The configuration violates a model constraint.
    InvalidConfig = 2,
    /// A non-configuration argument is out of range.
    InvalidArgument = 3,
    /// Internal failure; the call had no effect.
    Panic = 4,
}

/// How values are rounded when low bits are dropped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlicefftRounding {
    /// Round to nearest, ties away from zero.
    HalfAway = 0,
    /// Drop low bits, rounding toward negative infinity.
    Truncate = 1,
}

/// Model parameters. Start from `slicefft_config_default` and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlicefftConfig {
    /// Transform length; a power of two, at least 2.
    pub n: u32,
    /// Data word width in bits, 2 to 64.
    pub word_bits: u32,
    /// Fraction bits, at most word_bits - 1.
    pub frac_bits: u32,
    /// Low bits dropped from each stored rotation coefficient.
    pub rom_shift: u32,
    /// Digit-slice block width inside the rotator multipliers.
    pub bits_per_block: u32,
    pub rounding: SlicefftRounding,
    /// Nonzero halves at every butterfly rank so words keep their width.
    pub scaling: u8,
    /// Nonzero rotates by stored unity coefficients instead of bypassing.
    pub rotate_unity: u8,
    /// Rotator multiplier register depth in cycles, 0 to 16.
    pub mult_depth: u32,
}

/// One narrowed coefficient ROM entry.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlicefftTwiddle {
    /// Root-of-unity exponent this slot applies.
    pub exponent: u32,
    /// Stored integer coefficient, real rail.
    pub stored_re: i64,
    /// Stored integer coefficient, imaginary rail.
    pub stored_im: i64,
    /// Unquantized coefficient, real rail.
    pub exact_re: f64,
    /// Unquantized coefficient, imaginary rail.
    pub exact_im: f64,
}

/// Opaque streaming pipeline handle.
pub struct SlicefftPipeline {
    inner: SdfPipeline,
}

fn rounding_of(r: SlicefftRounding) -> Rounding {
    match r {
        SlicefftRounding::HalfAway => Rounding::HalfAwayFromZero,
        SlicefftRounding::Truncate => Rounding::Truncate,
    }
}

fn build_config(c: &SlicefftConfig) -> Result<PipelineConfig, SlicefftStatus> {
    let format = FixedFormat::new(c.word_bits, c.frac_bits)
        .map_err(|_| SlicefftStatus::InvalidConfig)?;
    Ok(PipelineConfig {
        n: c.n as usize,
        format,
        fft: FixedFftParams {
            rom_shift: c.rom_shift,
            bits_per_block: c.bits_per_block,
            rounding: rounding_of(c.rounding),
            scaling: ScalingPolicy {
                halve_rank1: c.scaling != 0,
                halve_rank2: c.scaling != 0,
            },
            rotate_unity: c.rotate_unity != 0,
        },
        mult_depth: c.mult_depth,
        fault: None,
    })
}

fn guarded(f: impl FnOnce() -> SlicefftStatus) -> SlicefftStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(SlicefftStatus::Panic)
}

/// Default 16-bit profile for an n-point transform.
#[no_mangle]
pub extern "C" fn slicefft_config_default(n: u32) -> SlicefftConfig {
    SlicefftConfig {
        n,
        word_bits: 16,
        frac_bits: 15,
        rom_shift: 6,
        bits_per_block: 4,
        rounding: SlicefftRounding::HalfAway,
        scaling: 1,
        rotate_unity: 0,
        mult_depth: 1,
    }
}

/// Build a pipeline and store the handle in `out`.
///
/// # Safety
/// `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_new(
    config: *const SlicefftConfig,
    out: *mut *mut SlicefftPipeline,
) -> SlicefftStatus {
    if config.is_null() || out.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        let built = match build_config(&*config) {
            Ok(c) => c,
            Err(status) => return status,
        };
        match SdfPipeline::new(built) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SlicefftPipeline { inner }));
                SlicefftStatus::Ok
            }
            Err(_) => SlicefftStatus::InvalidConfig,
        }
    })
}

/// Release a handle. NULL is accepted and ignored.
///
/// # Safety
/// `pipeline` must be NULL or a handle from `slicefft_pipeline_new` that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_free(pipeline: *mut SlicefftPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Clear all pipeline state, as if freshly constructed.
///
/// # Safety
/// `pipeline` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_reset(pipeline: *mut SlicefftPipeline) -> SlicefftStatus {
    if pipeline.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        (*pipeline).inner.reset();
        SlicefftStatus::Ok
    })
}

/// Cycles from a frame's first input to its first output.
///
/// # Safety
/// `pipeline` must be a live handle; `out_cycles` must be valid.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_latency(
    pipeline: *const SlicefftPipeline,
    out_cycles: *mut u64,
) -> SlicefftStatus {
    if pipeline.is_null() || out_cycles.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        *out_cycles = (*pipeline).inner.latency();
        SlicefftStatus::Ok
    })
}

/// Rotator output clips since construction or the last reset.
///
/// # Safety
/// `pipeline` must be a live handle; `out_count` must be valid.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_saturations(
    pipeline: *const SlicefftPipeline,
    out_count: *mut u64,
) -> SlicefftStatus {
    if pipeline.is_null() || out_count.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        *out_count = (*pipeline).inner.saturations();
        SlicefftStatus::Ok
    })
}

/// Advance one cycle: push one sample, receive one sample.
///
/// Rails carry raw fixed-point integers in the configured format; inputs
/// outside that range are rejected. Outputs are meaningful once the
/// pipeline has been fed `latency` samples.
///
/// # Safety
/// `pipeline` must be a live handle; `out_re` and `out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn slicefft_pipeline_tick(
    pipeline: *mut SlicefftPipeline,
    re_raw: i64,
    im_raw: i64,
    out_re: *mut i64,
    out_im: *mut i64,
) -> SlicefftStatus {
    if pipeline.is_null() || out_re.is_null() || out_im.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        let p = &mut (*pipeline).inner;
        let format = p.config().format;
        let range = format.min_raw()..=format.max_raw();
        if !range.contains(&re_raw) || !range.contains(&im_raw) {
            return SlicefftStatus::InvalidArgument;
        }
        let input = ComplexFixed::new(
            slicefft::fixedpoint::Fixed::from_raw(re_raw, format),
            slicefft::fixedpoint::Fixed::from_raw(im_raw, format),
        );
        match p.tick(input) {
            Ok(out) => {
                *out_re = out.re.raw();
                *out_im = out.im.raw();
                SlicefftStatus::Ok
            }
            Err(_) => SlicefftStatus::InvalidArgument,
        }
    })
}

/// Transform one frame through the fixed-point datapath.
///
/// `input` and `output` are interleaved re,im pairs of `config.n` samples
/// (2n doubles each). Inputs are quantized to the configured format first.
/// Nonzero `natural_order` permutes bins into natural order; otherwise
/// they arrive in the hardware's bit-reversed order. `out_saturations`
/// may be NULL.
///
/// # Safety
/// `config`, `input`, and `output` must be valid for their stated sizes.
#[no_mangle]
pub unsafe extern "C" fn slicefft_fft_frame(
    config: *const SlicefftConfig,
    input: *const f64,
    output: *mut f64,
    natural_order: u8,
    out_saturations: *mut u64,
) -> SlicefftStatus {
    if config.is_null() || input.is_null() || output.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        let built = match build_config(&*config) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let n = built.n;
        let mut pipeline = match SdfPipeline::new(built) {
            Ok(p) => p,
            Err(_) => return SlicefftStatus::InvalidConfig,
        };
        let rounding = built.fft.rounding;
        let frame: Vec<ComplexFixed> = (0..n)
            .map(|i| {
                ComplexFixed::quantize(
                    *input.add(2 * i),
                    *input.add(2 * i + 1),
                    built.format,
                    rounding,
                )
            })
            .collect();
        let result = match pipeline.run_frames(&[frame], None) {
            Ok(r) => r,
            Err(_) => return SlicefftStatus::InvalidArgument,
        };
        let spectrum = if natural_order != 0 {
            bit_reverse_permute(&result.frames[0])
        } else {
            result.frames[0].clone()
        };
        for (i, s) in spectrum.samples.iter().enumerate() {
            *output.add(2 * i) = s.re.to_real();
            *output.add(2 * i + 1) = s.im.to_real();
        }
        if !out_saturations.is_null() {
            *out_saturations = result.saturations;
        }
        SlicefftStatus::Ok
    })
}

/// Reference transform in double precision, natural bin order.
///
/// `input` and `output` are interleaved re,im pairs (2n doubles each);
/// every bin is multiplied by `scale`.
///
/// # Safety
/// `input` and `output` must be valid for 2n doubles.
#[no_mangle]
pub unsafe extern "C" fn slicefft_dft_reference(
    input: *const f64,
    n: u32,
    scale: f64,
    output: *mut f64,
) -> SlicefftStatus {
    if input.is_null() || output.is_null() {
        return SlicefftStatus::NullArgument;
    }
    if n == 0 {
        return SlicefftStatus::InvalidArgument;
    }
    guarded(|| {
        let frame: Vec<num_complex::Complex64> = (0..n as usize)
            .map(|i| num_complex::Complex64::new(*input.add(2 * i), *input.add(2 * i + 1)))
            .collect();
        for (i, bin) in dft_direct(&frame, scale).iter().enumerate() {
            *output.add(2 * i) = bin.re;
            *output.add(2 * i + 1) = bin.im;
        }
        SlicefftStatus::Ok
    })
}

/// Read one coefficient ROM entry of a rotation stage.
///
/// Stage 0 is the rotator nearest the input; `position` wraps by the
/// stage's span, matching the hardware's sample-counter addressing.
///
/// # Safety
/// `config` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn slicefft_twiddle_entry(
    config: *const SlicefftConfig,
    stage: u32,
    position: u32,
    out: *mut SlicefftTwiddle,
) -> SlicefftStatus {
    if config.is_null() || out.is_null() {
        return SlicefftStatus::NullArgument;
    }
    guarded(|| {
        let c = &*config;
        let format = match FixedFormat::new(c.word_bits, c.frac_bits) {
            Ok(f) => f,
            Err(_) => return SlicefftStatus::InvalidConfig,
        };
        let rom = match slicefft::complex_mult::TwiddleRom::for_stage(
            c.n as usize,
            stage as usize,
            format,
            c.rom_shift,
            rounding_of(c.rounding),
        ) {
            Ok(r) => r,
            Err(_) => return SlicefftStatus::InvalidArgument,
        };
        let e = rom.entry(position as usize);
        *out = SlicefftTwiddle {
            exponent: e.exponent(),
            stored_re: e.stored_re(),
            stored_im: e.stored_im(),
            exact_re: e.exact().re,
            exact_im: e.exact().im,
        };
        SlicefftStatus::Ok
    })
}

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn slicefft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn default_config_builds_and_reports_latency() {
        let config = slicefft_config_default(8);
        let mut handle: *mut SlicefftPipeline = ptr::null_mut();
        unsafe {
            assert_eq!(
                slicefft_pipeline_new(&config, &mut handle),
                SlicefftStatus::Ok
            );
            let mut latency = 0u64;
            assert_eq!(
                slicefft_pipeline_latency(handle, &mut latency),
                SlicefftStatus::Ok
            );
            assert_eq!(latency, 8);
            slicefft_pipeline_free(handle);
        }
    }

    #[test]
    fn streaming_impulse_lands_on_exact_bins() {
        let config = slicefft_config_default(8);
        let mut handle: *mut SlicefftPipeline = ptr::null_mut();
        unsafe {
            assert_eq!(
                slicefft_pipeline_new(&config, &mut handle),
                SlicefftStatus::Ok
            );
            let mut outputs = Vec::new();
            for cycle in 0..16 {
                let re = if cycle == 0 { 16384 } else { 0 };
                let (mut or, mut oi) = (0i64, 0i64);
                assert_eq!(
                    slicefft_pipeline_tick(handle, re, 0, &mut or, &mut oi),
                    SlicefftStatus::Ok
                );
                outputs.push((or, oi));
            }
            assert!(outputs[..8].iter().all(|&(r, i)| r == 0 && i == 0));
            assert!(outputs[8..].iter().all(|&(r, i)| r == 2048 && i == 0));
            slicefft_pipeline_free(handle);
        }
    }

    #[test]
    fn tick_rejects_out_of_range_rails() {
        let config = slicefft_config_default(8);
        let mut handle: *mut SlicefftPipeline = ptr::null_mut();
        unsafe {
            slicefft_pipeline_new(&config, &mut handle);
            let (mut or, mut oi) = (0i64, 0i64);
            assert_eq!(
                slicefft_pipeline_tick(handle, 1 << 20, 0, &mut or, &mut oi),
                SlicefftStatus::InvalidArgument
            );
            slicefft_pipeline_free(handle);
        }
    }

    #[test]
    fn null_and_invalid_configs_are_reported() {
        let mut handle: *mut SlicefftPipeline = ptr::null_mut();
        unsafe {
            assert_eq!(
                slicefft_pipeline_new(ptr::null(), &mut handle),
                SlicefftStatus::NullArgument
            );
            let mut bad = slicefft_config_default(7);
            assert_eq!(
                slicefft_pipeline_new(&bad, &mut handle),
                SlicefftStatus::InvalidConfig
            );
            bad = slicefft_config_default(8);
            bad.frac_bits = 16;
            assert_eq!(
                slicefft_pipeline_new(&bad, &mut handle),
                SlicefftStatus::InvalidConfig
            );
            assert_eq!(slicefft_pipeline_reset(ptr::null_mut()), SlicefftStatus::NullArgument);
        }
    }

    #[test]
    fn frame_transform_tracks_the_reference() {
        let config = slicefft_config_default(8);
        let input: Vec<f64> = (0..16).map(|i| 0.03 * (i as f64 - 7.5)).collect();
        let mut fixed_out = vec![0.0f64; 16];
        let mut exact_out = vec![0.0f64; 16];
        let mut sats = u64::MAX;
        unsafe {
            assert_eq!(
                slicefft_fft_frame(&config, input.as_ptr(), fixed_out.as_mut_ptr(), 1, &mut sats),
                SlicefftStatus::Ok
            );
            assert_eq!(
                slicefft_dft_reference(input.as_ptr(), 8, 0.125, exact_out.as_mut_ptr()),
                SlicefftStatus::Ok
            );
        }
        assert_eq!(sats, 0);
        for (g, e) in fixed_out.iter().zip(&exact_out) {
            assert!((g - e).abs() < 1e-3, "{g} vs {e}");
        }
    }

    #[test]
    fn twiddle_entries_match_the_narrowed_rom() {
        let config = slicefft_config_default(8);
        let mut entry = SlicefftTwiddle {
            exponent: 0,
            stored_re: 0,
            stored_im: 0,
            exact_re: 0.0,
            exact_im: 0.0,
        };
        unsafe {
            assert_eq!(
                slicefft_twiddle_entry(&config, 0, 5, &mut entry),
                SlicefftStatus::Ok
            );
            assert_eq!((entry.exponent, entry.stored_re, entry.stored_im), (1, 362, -363));
            // Positions wrap by span.
            assert_eq!(
                slicefft_twiddle_entry(&config, 0, 13, &mut entry),
                SlicefftStatus::Ok
            );
            assert_eq!(entry.stored_re, 362);
            // Stage 1 of an 8-point transform has no rotator.
            assert_eq!(
                slicefft_twiddle_entry(&config, 1, 0, &mut entry),
                SlicefftStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { std::ffi::CStr::from_ptr(slicefft_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn generated_header_covers_the_surface() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include")
            .join("slicefft.h");
        let text = std::fs::read_to_string(header).unwrap();
        for symbol in [
            "slicefft_config_default",
            "slicefft_pipeline_new",
            "slicefft_pipeline_free",
            "slicefft_pipeline_reset",
            "slicefft_pipeline_latency",
            "slicefft_pipeline_saturations",
            "slicefft_pipeline_tick",
            "slicefft_fft_frame",
            "slicefft_dft_reference",
            "slicefft_twiddle_entry",
            "slicefft_version",
            "typedef struct SlicefftPipeline SlicefftPipeline;",
        ] {
            assert!(text.contains(symbol), "header is missing {symbol}");
        }
    }
}
