//! Cycle-driven model of the single-path delay-feedback pipeline.
//!
//! One complex sample enters per cycle and one leaves per cycle. The stage
//! chain for an N-point transform alternates butterfly ranks with rotators:
//! rank-1 butterfly with feedback depth N/2, rank-2 with depth N/4, a
//! rotator spanning N, then the same pattern on N/4, down to a final depth-1
//! or depth-2 tail. Total latency is the sum of feedback depths, N - 1,
//! plus the rotator register depth for each rotator stage.
//!
//! A butterfly stage spends half of each control window filling its
//! feedback line while draining stored differences, and the other half
//! combining the line head with the live input: the sum leaves immediately,
//! the difference goes back into the line. Rank-2 stages additionally swap
//! rails on the live input (the -j rotation) during the second compute
//! window of each span. Rotator stages address their coefficient ROM with
//! the running sample index modulo the span; unity slots bypass the
//! multiplier but still ride its registers so the stream stays aligned.
//!
//! Streamed outputs match the functional pass in `radix22` bit for bit:
//! the stream order at every stage boundary equals that pass's array order,
//! and both routes share the same word-level arithmetic.

use crate::complex_mult::{TwiddleRom, cmul3};
use crate::digit_slicing::{FaultSpec, SliceConfig};
use crate::fixedpoint::{ComplexFixed, FixedFormat, Rounding, add, scale_half_round, sub};
use crate::instrument::{self, OpCounts};
use crate::radix22::{Domain, FftError, FixedFftParams, Frame, Ordering};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Fft(#[from] FftError),
    #[error("multiplier depth {0} outside 0..=16")]
    MultDepth(u32),
    #[error("fault targets stage {0}, which is not a rotator")]
    FaultStage(usize),
    #[error("fault block {block} bit {bit} outside the rotator's slice layout")]
    FaultPosition { block: u32, bit: u32 },
    #[error("frame {index} has {got} samples, pipeline expects {want}")]
    FrameLength {
        index: usize,
        got: usize,
        want: usize,
    },
}

/// Full build description of a pipeline instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub n: usize,
    pub format: FixedFormat,
    pub fft: FixedFftParams,
    /// Register depth of each rotator's multiplier, in cycles.
    pub mult_depth: u32,
    /// Optional single-bit corruption in one rotator's first multiply.
    pub fault: Option<StageFault>,
}

impl PipelineConfig {
    /// Paper-configuration pipeline: N-point, Q1.15 words, 4-bit slicing
    /// blocks, coefficients narrowed by 6 bits, one multiplier register.
    pub fn default_16bit(n: usize) -> Self {
        Self {
            n,
            format: FixedFormat::q1_15(),
            fft: FixedFftParams::default_16bit(),
            mult_depth: 1,
            fault: None,
        }
    }
}

/// A fault bound to one rotator stage of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageFault {
    pub stage: usize,
    pub fault: FaultSpec,
}

/// Signals a trace can record each cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSignal {
    /// Sample entering the stage.
    Input,
    /// Head of the feedback line before the cycle's operation.
    FbHead,
    /// Compute-enable control: 0 while filling, 1 while combining.
    Ci,
    /// Rank-2 window parity; the -j swap is active when ci and c2 are 1.
    C2,
    /// ROM slot a rotator addressed this cycle.
    Slot,
    /// Sample leaving the stage.
    Output,
}

impl TraceSignal {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceSignal::Input => "input",
            TraceSignal::FbHead => "fb_head",
            TraceSignal::Ci => "ci",
            TraceSignal::C2 => "c2",
            TraceSignal::Slot => "slot",
            TraceSignal::Output => "output",
        }
    }
}

/// One recorded observation. Control and slot signals put their value in
/// `re_raw` with `im_raw` zero.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub cycle: u64,
    pub stage: usize,
    pub signal: TraceSignal,
    pub re_raw: i64,
    pub im_raw: i64,
}

/// Cycle-by-cycle signal capture across the whole chain.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub stage_names: Vec<String>,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    fn sample(&mut self, cycle: u64, stage: usize, signal: TraceSignal, v: ComplexFixed) {
        self.rows.push(TraceRow {
            cycle,
            stage,
            signal,
            re_raw: v.re.raw(),
            im_raw: v.im.raw(),
        });
    }

    fn control(&mut self, cycle: u64, stage: usize, signal: TraceSignal, v: i64) {
        self.rows.push(TraceRow {
            cycle,
            stage,
            signal,
            re_raw: v,
            im_raw: 0,
        });
    }
}

/// Static description of one chain position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageInfo {
    pub name: String,
    /// Cycles this stage adds to the pipeline latency.
    pub delay: u64,
    /// Cycles before the stage sees the first sample of a batch.
    pub offset: u64,
    /// Feedback depth for butterflies, ROM span for rotators.
    pub extent: usize,
}

/// Reinterpret a warmup zero in the format a stage expects.
///
/// Before real data reaches a stage, everything flowing into it is the
/// zero its registers reset to, tagged with the upstream stage's width.
/// Hardware has no such tags; retagging a zero is value-preserving. Live
/// data must already match.
fn retag_zero(v: ComplexFixed, fmt: FixedFormat) -> ComplexFixed {
    if v.format() == fmt {
        v
    } else {
        assert!(
            v.re.raw() == 0 && v.im.raw() == 0,
            "format change on a live sample"
        );
        ComplexFixed::zero(fmt)
    }
}

struct ButterflyStage {
    /// Rank-2 stages swap rails on alternate compute windows.
    cross_rank: bool,
    depth: usize,
    offset: u64,
    line: VecDeque<ComplexFixed>,
    input_format: FixedFormat,
    halve: bool,
}

impl ButterflyStage {
    fn tick(
        &mut self,
        cycle: u64,
        input: ComplexFixed,
        rounding: Rounding,
        stage: usize,
        trace: Option<&mut Trace>,
    ) -> ComplexFixed {
        let input = retag_zero(input, self.input_format);
        let depth = self.depth as i64;
        let local = cycle as i64 - self.offset as i64;
        let ci = local.rem_euclid(2 * depth) >= depth;
        let c2 = self.cross_rank && local.rem_euclid(4 * depth) >= 2 * depth;
        let cross = ci && c2;

        let head = self.line[0];
        let out = if ci {
            let a = self.line.pop_front().expect("line never empties");
            let b = input;
            // The -j rotation of b folds into the adds as a rail exchange,
            // so no raw word is ever negated on its own.
            let (sum_re, sum_im, diff_re, diff_im) = if cross {
                (add(a.re, b.im), sub(a.im, b.re), sub(a.re, b.im), add(a.im, b.re))
            } else {
                (add(a.re, b.re), add(a.im, b.im), sub(a.re, b.re), sub(a.im, b.im))
            };
            let (sum, diff) = if self.halve {
                (
                    ComplexFixed::new(
                        scale_half_round(sum_re, rounding),
                        scale_half_round(sum_im, rounding),
                    ),
                    ComplexFixed::new(
                        scale_half_round(diff_re, rounding),
                        scale_half_round(diff_im, rounding),
                    ),
                )
            } else {
                (
                    ComplexFixed::new(sum_re, sum_im),
                    ComplexFixed::new(diff_re, diff_im),
                )
            };
            self.line.push_back(diff);
            sum
        } else {
            self.line.push_back(input);
            self.line.pop_front().expect("line never empties")
        };

        if let Some(t) = trace {
            t.sample(cycle, stage, TraceSignal::Input, input);
            t.sample(cycle, stage, TraceSignal::FbHead, head);
            t.control(cycle, stage, TraceSignal::Ci, ci as i64);
            if self.cross_rank {
                t.control(cycle, stage, TraceSignal::C2, c2 as i64);
            }
            t.sample(cycle, stage, TraceSignal::Output, out);
        }
        out
    }
}

struct RotatorStage {
    rom: TwiddleRom,
    offset: u64,
    pipe: VecDeque<ComplexFixed>,
    input_format: FixedFormat,
    bits_per_block: u32,
    rotate_unity: bool,
    fault: Option<FaultSpec>,
}

impl RotatorStage {
    fn tick(
        &mut self,
        cycle: u64,
        input: ComplexFixed,
        rounding: Rounding,
        stage: usize,
        saturations: &mut u64,
        trace: Option<&mut Trace>,
    ) -> Result<ComplexFixed, PipelineError> {
        let input = retag_zero(input, self.input_format);
        let span = self.rom.span() as i64;
        let slot = (cycle as i64 - self.offset as i64).rem_euclid(span) as usize;
        let entry = self.rom.entry(slot);
        let rotated = if entry.is_unity() && !self.rotate_unity {
            input
        } else {
            let r = cmul3(input, entry, self.bits_per_block, rounding, self.fault)
                .map_err(FftError::Twiddle)?;
            if r.saturated {
                *saturations += 1;
            }
            r.value
        };
        self.pipe.push_back(rotated);
        let out = self.pipe.pop_front().expect("pipe never empties");

        if let Some(t) = trace {
            t.sample(cycle, stage, TraceSignal::Input, input);
            t.control(cycle, stage, TraceSignal::Slot, slot as i64);
            t.sample(cycle, stage, TraceSignal::Output, out);
        }
        Ok(out)
    }
}

enum Stage {
    Butterfly(ButterflyStage),
    Rotator(RotatorStage),
}

/// The streaming pipeline. Feed one sample per cycle with [`tick`]; batch
/// whole frames with [`run_frames`].
///
/// [`tick`]: SdfPipeline::tick
/// [`run_frames`]: SdfPipeline::run_frames
pub struct SdfPipeline {
    config: PipelineConfig,
    stages: Vec<Stage>,
    infos: Vec<StageInfo>,
    cycle: u64,
    saturations: u64,
}

/// Outcome of a batch run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// One spectrum per input frame, in bit-reversed index order.
    pub frames: Vec<Frame<ComplexFixed>>,
    /// Rotator output clips during the run.
    pub saturations: u64,
    /// Total cycles ticked, frames plus flush.
    pub cycles: u64,
    /// Shift-add work spent during the run.
    pub ops: OpCounts,
}

impl SdfPipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        let n = config.n;
        if n < 2 || !n.is_power_of_two() {
            return Err(FftError::BadLength(n).into());
        }
        if config.mult_depth > 16 {
            return Err(PipelineError::MultDepth(config.mult_depth));
        }
        let ranks = n.trailing_zeros();
        let growth = (!config.fft.scaling.halve_rank1 as u32
            + !config.fft.scaling.halve_rank2 as u32)
            * (ranks / 2)
            + (ranks % 2) * !config.fft.scaling.halve_rank1 as u32;
        if config.format.word_bits() + growth + 1 > 64 {
            return Err(FftError::WidthExhausted.into());
        }

        fn push_butterfly(
            stages: &mut Vec<Stage>,
            infos: &mut Vec<StageInfo>,
            offset: &mut u64,
            fmt: &mut FixedFormat,
            depth: usize,
            cross_rank: bool,
            halve: bool,
        ) {
            let idx = stages.len();
            stages.push(Stage::Butterfly(ButterflyStage {
                cross_rank,
                depth,
                offset: *offset,
                line: VecDeque::from(vec![ComplexFixed::zero(*fmt); depth]),
                input_format: *fmt,
                halve,
            }));
            infos.push(StageInfo {
                name: format!("s{idx}.{}", if cross_rank { "bf2ii" } else { "bf2i" }),
                delay: depth as u64,
                offset: *offset,
                extent: depth,
            });
            *offset += depth as u64;
            if !halve {
                *fmt = fmt.widened();
            }
        }

        let mut stages = Vec::new();
        let mut infos = Vec::new();
        let mut offset = 0u64;
        let mut fmt = config.format;
        let halve1 = config.fft.scaling.halve_rank1;
        let halve2 = config.fft.scaling.halve_rank2;

        let mut span = n;
        while span >= 4 {
            push_butterfly(&mut stages, &mut infos, &mut offset, &mut fmt, span / 2, false, halve1);
            push_butterfly(&mut stages, &mut infos, &mut offset, &mut fmt, span / 4, true, halve2);
            if span >= 8 {
                let rom = TwiddleRom::generate(
                    span,
                    config.format,
                    config.fft.rom_shift,
                    config.fft.rounding,
                )
                .map_err(FftError::Twiddle)?;
                let idx = stages.len();
                let depth = config.mult_depth as usize;
                stages.push(Stage::Rotator(RotatorStage {
                    rom,
                    offset,
                    pipe: VecDeque::from(vec![ComplexFixed::zero(fmt); depth]),
                    input_format: fmt,
                    bits_per_block: config.fft.bits_per_block,
                    rotate_unity: config.fft.rotate_unity,
                    fault: None,
                }));
                infos.push(StageInfo {
                    name: format!("s{idx}.tw"),
                    delay: depth as u64,
                    offset,
                    extent: span,
                });
                offset += depth as u64;
            }
            span /= 4;
        }
        if span == 2 {
            push_butterfly(&mut stages, &mut infos, &mut offset, &mut fmt, 1, false, halve1);
        }

        if let Some(sf) = config.fault {
            let Some(Stage::Rotator(rot)) = stages.get_mut(sf.stage) else {
                return Err(PipelineError::FaultStage(sf.stage));
            };
            // The fault lands in the first multiply, whose data operand is
            // a one-bit-grown pre-add sliced at the block width.
            let grown_bits = rot.input_format.word_bits() + 1;
            let layout = SliceConfig::new(
                grown_bits.div_ceil(config.fft.bits_per_block),
                config.fft.bits_per_block,
            )
            .map_err(|e| PipelineError::Fft(FftError::Twiddle(e.into())))?;
            if sf.fault.block >= layout.blocks() || sf.fault.bit >= layout.bits_per_block() {
                return Err(PipelineError::FaultPosition {
                    block: sf.fault.block,
                    bit: sf.fault.bit,
                });
            }
            rot.fault = Some(sf.fault);
        }

        Ok(Self {
            config,
            stages,
            infos,
            cycle: 0,
            saturations: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Cycles from a sample entering to its transformed value leaving.
    pub fn latency(&self) -> u64 {
        self.infos.iter().map(|s| s.delay).sum()
    }

    pub fn stage_infos(&self) -> &[StageInfo] {
        &self.infos
    }

    /// Cycles ticked since construction or the last reset.
    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    /// Rotator output clips since construction or the last reset.
    pub fn saturations(&self) -> u64 {
        self.saturations
    }

    /// Multiplier activations one frame costs in steady state.
    pub fn rotations_per_frame(&self) -> u64 {
        self.stages
            .iter()
            .map(|s| match s {
                Stage::Butterfly(_) => 0,
                Stage::Rotator(r) => {
                    let span = r.rom.span();
                    let active = r
                        .rom
                        .entries()
                        .iter()
                        .filter(|e| self.config.fft.rotate_unity || !e.is_unity())
                        .count();
                    (self.config.n / span * active) as u64
                }
            })
            .sum()
    }

    /// Empty all delay lines and multiplier registers and restart the
    /// cycle count, as a hardware reset line would.
    pub fn reset(&mut self) {
        let mut fmt = self.config.format;
        for stage in &mut self.stages {
            match stage {
                Stage::Butterfly(b) => {
                    for v in &mut b.line {
                        *v = ComplexFixed::zero(fmt);
                    }
                    if !b.halve {
                        fmt = fmt.widened();
                    }
                }
                Stage::Rotator(r) => {
                    for v in &mut r.pipe {
                        *v = ComplexFixed::zero(fmt);
                    }
                }
            }
        }
        self.cycle = 0;
        self.saturations = 0;
    }

    /// Advance one cycle: push `input` into the chain, get the sample
    /// leaving the chain this cycle.
    pub fn tick(&mut self, input: ComplexFixed) -> Result<ComplexFixed, PipelineError> {
        self.tick_inner(input, None)
    }

    /// [`tick`](SdfPipeline::tick) that also appends every stage's signals
    /// to `trace`.
    pub fn tick_traced(
        &mut self,
        input: ComplexFixed,
        trace: &mut Trace,
    ) -> Result<ComplexFixed, PipelineError> {
        self.tick_inner(input, Some(trace))
    }

    fn tick_inner(
        &mut self,
        input: ComplexFixed,
        mut trace: Option<&mut Trace>,
    ) -> Result<ComplexFixed, PipelineError> {
        assert_eq!(
            input.format(),
            self.config.format,
            "input format must match the pipeline"
        );
        let rounding = self.config.fft.rounding;
        let cycle = self.cycle;
        let mut sample = input;
        for (i, stage) in self.stages.iter_mut().enumerate() {
            sample = match stage {
                Stage::Butterfly(b) => b.tick(cycle, sample, rounding, i, trace.as_deref_mut()),
                Stage::Rotator(r) => r.tick(
                    cycle,
                    sample,
                    rounding,
                    i,
                    &mut self.saturations,
                    trace.as_deref_mut(),
                )?,
            };
        }
        self.cycle += 1;
        Ok(sample)
    }

    /// Start a new trace with this pipeline's stage names.
    pub fn new_trace(&self) -> Trace {
        Trace {
            stage_names: self.infos.iter().map(|s| s.name.clone()).collect(),
            rows: Vec::new(),
        }
    }

    /// Transform a batch of frames streamed back to back, then flush.
    ///
    /// The pipeline is reset first, so a batch is self-contained: F frames
    /// cost F*N + latency cycles. Outputs are spectra in bit-reversed
    /// index order.
    pub fn run_frames(
        &mut self,
        frames: &[Vec<ComplexFixed>],
        mut trace: Option<&mut Trace>,
    ) -> Result<RunResult, PipelineError> {
        let n = self.config.n;
        for (index, f) in frames.iter().enumerate() {
            if f.len() != n {
                return Err(PipelineError::FrameLength {
                    index,
                    got: f.len(),
                    want: n,
                });
            }
        }
        self.reset();
        let sat_before = self.saturations;
        let ops_before = instrument::snapshot();

        let latency = self.latency();
        let total = frames.len() as u64 * n as u64 + latency;
        let zero = ComplexFixed::zero(self.config.format);
        let mut collected = Vec::with_capacity(frames.len() * n);
        for t in 0..total {
            let input = if (t as usize) < frames.len() * n {
                frames[t as usize / n][t as usize % n]
            } else {
                zero
            };
            let out = self.tick_inner(input, trace.as_deref_mut())?;
            if t >= latency {
                collected.push(out);
            }
        }

        let ops_after = instrument::snapshot();
        let frames_out = collected
            .chunks_exact(n)
            .map(|c| Frame::new(c.to_vec(), Domain::Frequency, Ordering::BitReversed))
            .collect();
        Ok(RunResult {
            frames: frames_out,
            saturations: self.saturations - sat_before,
            cycles: total,
            ops: OpCounts {
                multiplies: ops_after.multiplies - ops_before.multiplies,
                slice_adds: ops_after.slice_adds - ops_before.slice_adds,
            },
        })
    }
}
