//! Bit- and cycle-accurate model of a pipelined radix-2^2 SDF FFT whose
//! twiddle rotations run on digit-sliced shift-add arithmetic instead of
//! hardware multipliers.
//!
//! The crate has two computation routes that must agree bit for bit:
//!
//! * [`radix22`]: a functional in-place transform, easy to read and to
//!   check against a direct DFT.
//! * [`sdf_pipeline`]: a cycle-driven model of the streaming hardware,
//!   with per-stage feedback delay lines and control phasing.
//!
//! Supporting layers: [`fixedpoint`] for the word-level arithmetic,
//! [`digit_slicing`] for the shift-add multiplier, [`complex_mult`] for the
//! three-multiply complex rotator and its narrowed coefficient ROM,
//! [`metrics`] for error measurement against the double-precision DFT, and
//! [`instrument`] for operation counting.

pub mod complex_mult;
pub mod digit_slicing;
pub mod fixedpoint;
pub mod instrument;
pub mod io;
pub mod metrics;
pub mod radix22;
pub mod sdf_pipeline;
