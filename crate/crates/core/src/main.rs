//! Command-line front end for the pipelined transform model.
//!
//! Data CSVs go to stdout (or files); human-readable summaries go to
//! stderr so the two never mix. Exit codes: 0 success, 1 a verification
//! check failed, 2 bad usage or configuration, 3 file I/O trouble.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicefft::complex_mult::{cmul3, cmul4_direct, TwiddleRom};
use slicefft::digit_slicing::{shift_add_multiply_faulty, FaultSpec, SliceConfig};
use slicefft::fixedpoint::{quantize, ComplexFixed, Fixed, FixedFormat, Rounding};
use slicefft::io;
use slicefft::metrics;
use slicefft::radix22::{
    bit_reverse_permute, dft_direct, fft_r22_f64, fft_r22_fixed, FixedFftParams, ScalingPolicy,
};
use slicefft::sdf_pipeline::{PipelineConfig, SdfPipeline, StageFault};
use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "slicefft", version, about = "Pipelined fixed-point FFT model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream frames through the cycle-accurate pipeline.
    Run(RunArgs),
    /// Check the arithmetic against independent references.
    Verify(VerifyArgs),
    /// Measure accuracy across a configuration axis.
    Sweep(SweepArgs),
    /// Dump a rotation stage's coefficient ROM.
    TwiddleDump(TwiddleDumpArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Settings file with `key = value` lines; flags override it.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Transform length, a power of two >= 8.
    #[arg(long)]
    n: Option<usize>,
    /// Data word width in bits.
    #[arg(long, value_name = "BITS")]
    word_bits: Option<u32>,
    /// Fraction bits; default word_bits - 1.
    #[arg(long, value_name = "BITS")]
    frac_bits: Option<u32>,
    /// Low bits dropped from each stored rotation coefficient.
    #[arg(long, value_name = "BITS")]
    rom_shift: Option<u32>,
    /// Digit-slice block width inside the rotator multipliers.
    /// Must divide the word width.
    #[arg(long, alias = "slice-p", value_name = "BITS")]
    bits_per_block: Option<u32>,
    /// Digit-slice block count; blocks * bits_per_block must equal
    /// word_bits. Optional, derived from the width when omitted.
    #[arg(long, alias = "slice-b", value_name = "COUNT")]
    blocks: Option<u32>,
    /// Rounding mode for quantization and rotator narrowing.
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,
    /// Halve at every butterfly rank so words keep their width.
    #[arg(long, value_enum)]
    scaling: Option<Switch>,
    /// Rotate by stored unity coefficients instead of bypassing them.
    #[arg(long, value_enum)]
    rotate_unity: Option<Switch>,
    /// Rotator multiplier register depth, in cycles.
    #[arg(long, value_name = "CYCLES")]
    mult_depth: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    /// Round half away from zero.
    HalfAway,
    /// Drop low bits (round toward negative infinity).
    Truncate,
}

impl RoundingArg {
    fn mode(self) -> Rounding {
        match self {
            RoundingArg::HalfAway => Rounding::HalfAwayFromZero,
            RoundingArg::Truncate => Rounding::Truncate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input: a sample CSV path, `-` for stdin, or a generator name
    /// (`impulse`, `sine`, `random`). File length must be a multiple
    /// of n. Default is `random`.
    #[arg(long, value_name = "FILE|GENERATOR")]
    input: Option<String>,
    /// Directory for default-named artifacts (spectra.csv, trace.csv,
    /// report.csv). Specific path flags below override it.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output spectra CSV (default stdout).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Write a per-cycle signal trace CSV.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Write the run summary as a metric,value CSV.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Permute each output frame into natural bin order.
    #[arg(long)]
    natural_order: bool,
    /// Flip one partial-product bit in a rotator: STAGE:BLOCK:BIT,
    /// where STAGE is a stage name (s2.tw) or index.
    #[arg(long, value_name = "STAGE:BLOCK:BIT")]
    inject_fault: Option<String>,
    /// Seed for the random generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Frame count for generated input.
    #[arg(long)]
    frames: Option<usize>,
    /// Peak amplitude for generated input.
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyLevel {
    /// Randomized equivalence cases plus the pipeline checks.
    Quick,
    /// Additionally exhaust every 8-bit multiplier operand pair.
    Exhaustive,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "quick")]
    level: VerifyLevel,
    /// Test hook: corrupt one multiplier partial-product bit
    /// (BLOCK:BIT) and demand the equivalence check catches it.
    #[arg(long, value_name = "BLOCK:BIT")]
    inject_fault: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    /// Word width; requires --widths.
    WordBits,
    /// Both rounding modes at the configured width.
    Rounding,
    /// Every block width that divides the configured word width.
    BlockWidth,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value = "word-bits")]
    axis: SweepAxis,
    /// Inclusive word-width range for the word-bits axis, e.g. 10..16.
    #[arg(long, value_name = "LO..HI")]
    widths: Option<String>,
    /// Directory for the default-named sweep.csv.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Sweep table CSV (default stdout).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Args)]
struct TwiddleDumpArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Which rotation stage, counting from the pipeline input.
    #[arg(long, default_value_t = 0)]
    stage: usize,
    /// Directory for the default-named twiddle.csv.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Dump CSV (default stdout).
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

enum CliError {
    /// A verification check failed.
    Check(String),
    /// Bad flags, bad config file, or settings the model rejects.
    Usage(String),
    /// Filesystem trouble.
    File(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::File(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Check(m) | CliError::Usage(m) | CliError::File(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn file_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::File(format!("{}: {e}", path.display()))
}

/// Everything a subcommand needs, after defaults, config file, and flags
/// have been folded together in that order.
struct Settings {
    n: usize,
    word_bits: u32,
    frac_bits: Option<u32>,
    rom_shift: u32,
    bits_per_block: u32,
    blocks: Option<u32>,
    rounding: Rounding,
    scaling: bool,
    rotate_unity: bool,
    mult_depth: u32,
    seed: u64,
    frames: usize,
    amplitude: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            n: 8,
            word_bits: 16,
            frac_bits: None,
            rom_shift: 6,
            bits_per_block: 4,
            blocks: None,
            rounding: Rounding::HalfAwayFromZero,
            scaling: true,
            rotate_unity: false,
            mult_depth: 1,
            seed: 1,
            frames: 16,
            amplitude: 0.5,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("{key}: bad value {value:?}")))
}

fn parse_switch(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(CliError::Usage(format!(
            "config key {key}: expected on or off, got {value:?}"
        ))),
    }
}

impl Settings {
    fn resolve(common: &CommonArgs) -> Result<Self, CliError> {
        let mut s = Settings::default();
        if let Some(path) = &common.config {
            let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
            let pairs = io::parse_config(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            for (key, value) in &pairs {
                s.apply(key, value)?;
            }
        }
        let c = common;
        if let Some(v) = c.n {
            s.n = v;
        }
        if let Some(v) = c.word_bits {
            s.word_bits = v;
        }
        if let Some(v) = c.frac_bits {
            s.frac_bits = Some(v);
        }
        if let Some(v) = c.rom_shift {
            s.rom_shift = v;
        }
        if let Some(v) = c.bits_per_block {
            s.bits_per_block = v;
        }
        if let Some(v) = c.blocks {
            s.blocks = Some(v);
        }
        if let Some(v) = c.rounding {
            s.rounding = v.mode();
        }
        if let Some(v) = c.scaling {
            s.scaling = v.on();
        }
        if let Some(v) = c.rotate_unity {
            s.rotate_unity = v.on();
        }
        if let Some(v) = c.mult_depth {
            s.mult_depth = v;
        }
        s.check_layout()?;
        Ok(s)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = parse_value(key, value)?,
            "word_bits" => self.word_bits = parse_value(key, value)?,
            "frac_bits" => self.frac_bits = Some(parse_value(key, value)?),
            "rom_shift" => self.rom_shift = parse_value(key, value)?,
            "bits_per_block" => self.bits_per_block = parse_value(key, value)?,
            "blocks" => self.blocks = Some(parse_value(key, value)?),
            "rounding" => {
                self.rounding = match value {
                    "half-away" => Rounding::HalfAwayFromZero,
                    "truncate" => Rounding::Truncate,
                    _ => {
                        return Err(CliError::Usage(format!(
                            "config key rounding: expected half-away or truncate, got {value:?}"
                        )))
                    }
                }
            }
            "scaling" => self.scaling = parse_switch(key, value)?,
            "rotate_unity" => self.rotate_unity = parse_switch(key, value)?,
            "mult_depth" => self.mult_depth = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "frames" => self.frames = parse_value(key, value)?,
            "amplitude" => self.amplitude = parse_value(key, value)?,
            _ => return Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// The slice layout must tile the word exactly.
    fn check_layout(&self) -> Result<(), CliError> {
        if self.bits_per_block == 0 {
            return Err(CliError::Usage("bits_per_block must be at least 1".into()));
        }
        match self.blocks {
            Some(b) => {
                if b * self.bits_per_block != self.word_bits {
                    return Err(CliError::Usage(format!(
                        "{b} blocks of {} bits do not tile a {}-bit word",
                        self.bits_per_block, self.word_bits
                    )));
                }
            }
            None => {
                if !self.word_bits.is_multiple_of(self.bits_per_block) {
                    let options: Vec<String> = (1..=self.word_bits)
                        .filter(|p| self.word_bits.is_multiple_of(*p))
                        .map(|p| p.to_string())
                        .collect();
                    return Err(CliError::Usage(format!(
                        "block width {} does not divide word width {}; choose one of {}",
                        self.bits_per_block,
                        self.word_bits,
                        options.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_points(&self) -> Result<(), CliError> {
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(CliError::Usage(format!(
                "n = {}: must be a power of two, at least 8",
                self.n
            )));
        }
        Ok(())
    }

    fn format(&self) -> Result<FixedFormat, CliError> {
        let frac = self.frac_bits.unwrap_or(self.word_bits.saturating_sub(1));
        FixedFormat::new(self.word_bits, frac).map_err(usage)
    }

    fn scaling_policy(&self) -> ScalingPolicy {
        ScalingPolicy {
            halve_rank1: self.scaling,
            halve_rank2: self.scaling,
        }
    }

    fn fft_params(&self) -> FixedFftParams {
        FixedFftParams {
            rom_shift: self.rom_shift,
            bits_per_block: self.bits_per_block,
            rounding: self.rounding,
            scaling: self.scaling_policy(),
            rotate_unity: self.rotate_unity,
        }
    }

    fn pipeline_config(&self) -> Result<PipelineConfig, CliError> {
        self.check_points()?;
        Ok(PipelineConfig {
            n: self.n,
            format: self.format()?,
            fft: self.fft_params(),
            mult_depth: self.mult_depth,
            fault: None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::TwiddleDump(args) => cmd_twiddle_dump(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Open `path` for buffered writing, stdout when absent.
fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = fs::File::create(p).map_err(|e| file_err(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Default a missing artifact path into the `--out` directory.
fn artifact_path(
    explicit: Option<PathBuf>,
    out_dir: Option<&Path>,
    name: &str,
) -> Result<Option<PathBuf>, CliError> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| file_err(dir, e))?;
            Ok(Some(dir.join(name)))
        }
        None => Ok(None),
    }
}

fn read_input_samples(source: &str) -> Result<Vec<Complex64>, CliError> {
    let map_parse = |e: io::IoError| match e {
        io::IoError::Io(e) => CliError::File(format!("{source}: {e}")),
        parse => CliError::Usage(format!("{source}: {parse}")),
    };
    if source == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::File(format!("stdin: {e}")))?;
        io::read_samples(text.as_bytes()).map_err(map_parse)
    } else {
        let file = fs::File::open(source).map_err(|e| CliError::File(format!("{source}: {e}")))?;
        io::read_samples(std::io::BufReader::new(file)).map_err(map_parse)
    }
}

/// Build the input corpus from a generator name or a sample file.
fn input_frames(source: Option<&str>, s: &Settings) -> Result<Vec<Vec<Complex64>>, CliError> {
    let n = s.n;
    match source.unwrap_or("random") {
        "random" => Ok(metrics::random_corpus(n, s.frames, s.amplitude, s.seed)),
        "impulse" => {
            let mut frame = vec![Complex64::new(0.0, 0.0); n];
            frame[0] = Complex64::new(s.amplitude, 0.0);
            Ok(vec![frame; s.frames])
        }
        "sine" => {
            let frame: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(s.amplitude * (TAU * k as f64 / n as f64).sin(), 0.0))
                .collect();
            Ok(vec![frame; s.frames])
        }
        path => {
            let flat = read_input_samples(path)?;
            if flat.is_empty() || flat.len() % n != 0 {
                return Err(CliError::Usage(format!(
                    "{path}: {} samples, need a positive multiple of n = {n}",
                    flat.len()
                )));
            }
            Ok(flat.chunks(n).map(<[Complex64]>::to_vec).collect())
        }
    }
}

/// `STAGE:BLOCK:BIT` where STAGE is a pipeline stage name or index.
fn parse_stage_fault(spec: &str, probe: &SdfPipeline) -> Result<StageFault, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [stage, block, bit] = parts[..] else {
        return Err(CliError::Usage(format!(
            "fault spec {spec:?}: expected STAGE:BLOCK:BIT"
        )));
    };
    let stage = match stage.parse::<usize>() {
        Ok(i) => i,
        Err(_) => {
            let infos = probe.stage_infos();
            infos.iter().position(|s| s.name == stage).ok_or_else(|| {
                let names: Vec<&str> = infos.iter().map(|s| s.name.as_str()).collect();
                CliError::Usage(format!(
                    "fault spec {spec:?}: no stage named {stage:?} (stages: {})",
                    names.join(", ")
                ))
            })?
        }
    };
    Ok(StageFault {
        stage,
        fault: parse_bit_fault(&format!("{block}:{bit}"))?,
    })
}

/// `BLOCK:BIT` for faults addressed without a stage.
fn parse_bit_fault(spec: &str) -> Result<FaultSpec, CliError> {
    let Some((block, bit)) = spec.split_once(':') else {
        return Err(CliError::Usage(format!(
            "fault spec {spec:?}: expected BLOCK:BIT"
        )));
    };
    Ok(FaultSpec {
        block: parse_value("fault block", block)?,
        bit: parse_value("fault bit", bit)?,
    })
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut settings = Settings::resolve(&args.common)?;
    if let Some(v) = args.seed {
        settings.seed = v;
    }
    if let Some(v) = args.frames {
        settings.frames = v;
    }
    if let Some(v) = args.amplitude {
        settings.amplitude = v;
    }
    let mut config = settings.pipeline_config()?;
    let probe = SdfPipeline::new(config).map_err(usage)?;
    let mut pipeline = if let Some(spec) = &args.inject_fault {
        config.fault = Some(parse_stage_fault(spec, &probe)?);
        SdfPipeline::new(config).map_err(usage)?
    } else {
        probe
    };

    let n = settings.n;
    let input = input_frames(args.input.as_deref(), &settings)?;

    let format = settings.format()?;
    let mut input_clips = 0u64;
    let quantized: Vec<Vec<ComplexFixed>> = input
        .iter()
        .map(|frame| {
            frame
                .iter()
                .map(|c| {
                    let re = quantize(c.re, format, settings.rounding);
                    let im = quantize(c.im, format, settings.rounding);
                    input_clips += u64::from(re.saturated) + u64::from(im.saturated);
                    ComplexFixed::new(re.value, im.value)
                })
                .collect()
        })
        .collect();

    let output_path = artifact_path(args.output, args.out.as_deref(), "spectra.csv")?;
    let trace_path = artifact_path(args.trace, args.out.as_deref(), "trace.csv")?;
    let report_path = artifact_path(args.report, args.out.as_deref(), "report.csv")?;

    let mut trace = trace_path.as_ref().map(|_| pipeline.new_trace());
    let result = pipeline
        .run_frames(&quantized, trace.as_mut())
        .map_err(usage)?;

    if let (Some(path), Some(trace)) = (&trace_path, &trace) {
        let mut w = open_output(Some(path))?;
        io::write_trace(&mut w, trace).map_err(|e| file_err(path, e))?;
    }

    // Accumulated against the exact transform of what actually entered the
    // datapath, so the figures isolate arithmetic error from input
    // quantization.
    let gain = settings.scaling_policy().gain(n);
    let mut signal_energy = 0.0;
    let mut error_energy = 0.0;
    let mut max_abs_error = 0.0f64;
    let mut out_flat: Vec<Complex64> = Vec::with_capacity(input.len() * n);
    for (qin, out) in quantized.iter().zip(&result.frames) {
        let exact_in: Vec<Complex64> = qin.iter().map(ComplexFixed::to_complex64).collect();
        let reference = dft_direct(&exact_in, gain);
        let natural = bit_reverse_permute(out);
        let stats = metrics::error_stats(
            &reference,
            &natural
                .samples
                .iter()
                .map(ComplexFixed::to_complex64)
                .collect::<Vec<_>>(),
        )
        .map_err(usage)?;
        signal_energy += stats.signal_energy;
        error_energy += stats.error_energy;
        max_abs_error = max_abs_error.max(stats.max_abs_error);
        let emit = if args.natural_order { &natural } else { out };
        out_flat.extend(emit.samples.iter().map(ComplexFixed::to_complex64));
    }
    let sqnr_db = if error_energy == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal_energy / error_energy).log10()
    };
    let rms_error = (error_energy / (input.len() * n) as f64).sqrt();

    let mut w = open_output(output_path.as_deref())?;
    io::write_samples(&mut w, &out_flat).map_err(|e| CliError::File(e.to_string()))?;
    w.flush().map_err(|e| CliError::File(e.to_string()))?;

    let summary = [
        ("n", n.to_string()),
        ("frames", input.len().to_string()),
        ("latency_cycles", pipeline.latency().to_string()),
        ("cycles", result.cycles.to_string()),
        ("input_clips", input_clips.to_string()),
        ("saturations", result.saturations.to_string()),
        ("multiplies", result.ops.multiplies.to_string()),
        ("slice_adds", result.ops.slice_adds.to_string()),
        ("sqnr_db", format!("{sqnr_db:.3}")),
        ("max_abs_error", format!("{max_abs_error:.3e}")),
        ("rms_error", format!("{rms_error:.3e}")),
        (
            "output_order",
            if args.natural_order { "natural" } else { "bit-reversed" }.to_string(),
        ),
    ];
    for (metric, value) in &summary {
        eprintln!("{metric}: {value}");
    }
    if let Some(path) = &report_path {
        let mut w = open_output(Some(path))?;
        io::write_report(&mut w, summary.iter().map(|(m, v)| (*m, v.clone())))
            .map_err(|e| file_err(path, e))?;
    }
    Ok(())
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// Randomized 16-bit shift-add multiplier against direct products. The
/// optional fault corrupts one sliced bit and must surface here.
fn check_multiplier_random(cases: u32, fault: Option<FaultSpec>) -> Check {
    let cfg = SliceConfig::new(4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x51AB5);
    for i in 0..cases {
        let a = rng.gen_range(-32768i64..=32767);
        let b = rng.gen_range(-32768i64..=32767);
        let got = match shift_add_multiply_faulty(a, cfg, b, 16, fault) {
            Ok(v) => v,
            Err(e) => return check("multiplier_random", false, e.to_string()),
        };
        if got != a * b {
            return check(
                "multiplier_random",
                false,
                format!(
                    "counterexample after {i} good cases: a = {a}, b = {b}, expected {}, got {got}",
                    a * b
                ),
            );
        }
    }
    check(
        "multiplier_random",
        true,
        format!("{cases} random 16-bit products, shift-add equals direct"),
    )
}

/// Every signed 8-bit pair through a 2-block x 4-bit layout.
fn check_multiplier_exhaustive() -> Check {
    let cfg = SliceConfig::new(2, 4).unwrap();
    for a in -128i64..=127 {
        for b in -128i64..=127 {
            let got = shift_add_multiply_faulty(a, cfg, b, 8, None).unwrap();
            if got != a * b {
                return check(
                    "multiplier_exhaustive",
                    false,
                    format!("counterexample: a = {a}, b = {b}, expected {}, got {got}", a * b),
                );
            }
        }
    }
    check(
        "multiplier_exhaustive",
        true,
        "65536 exhaustive 8-bit products, shift-add equals direct".to_string(),
    )
}

/// Three-multiply rotation against the four-multiply direct form.
fn check_rotation_identity(cases: u32, format: FixedFormat, settings: &Settings) -> Check {
    let rom = match TwiddleRom::generate(8, format, settings.rom_shift, settings.rounding) {
        Ok(r) => r,
        Err(e) => return check("rotation_identity", false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x0707);
    for i in 0..cases {
        let a = ComplexFixed::new(
            Fixed::from_raw(rng.gen_range(format.min_raw()..=format.max_raw()), format),
            Fixed::from_raw(rng.gen_range(format.min_raw()..=format.max_raw()), format),
        );
        let entry = rom.entry(rng.gen_range(0..8));
        let three = cmul3(a, entry, settings.bits_per_block, settings.rounding, None).unwrap();
        let four = cmul4_direct(a, entry, settings.rounding).unwrap();
        if three != four {
            return check(
                "rotation_identity",
                false,
                format!(
                    "counterexample after {i} good cases: a = ({}, {}), exponent {}, expected ({}, {}), got ({}, {})",
                    a.re.raw(),
                    a.im.raw(),
                    entry.exponent(),
                    four.value.re.raw(),
                    four.value.im.raw(),
                    three.value.re.raw(),
                    three.value.im.raw()
                ),
            );
        }
    }
    check(
        "rotation_identity",
        true,
        format!("{cases} random rotations, 3 multiplies equal 4"),
    )
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut settings = Settings::resolve(&args.common)?;
    if let Some(v) = args.seed {
        settings.seed = v;
    }
    if let Some(v) = args.frames {
        settings.frames = v;
    }
    if let Some(v) = args.amplitude {
        settings.amplitude = v;
    }
    let config = settings.pipeline_config()?;
    // Surface bad settings as a usage error before any check runs.
    SdfPipeline::new(config).map_err(usage)?;
    let fault = args
        .inject_fault
        .as_deref()
        .map(parse_bit_fault)
        .transpose()?;

    let n = settings.n;
    let scaling = settings.scaling_policy();
    let gain = scaling.gain(n);
    let corpus = metrics::random_corpus(n, settings.frames.max(1), settings.amplitude, settings.seed);
    let mut checks = Vec::new();

    checks.push(check_multiplier_random(100_000, fault));
    if matches!(args.level, VerifyLevel::Exhaustive) {
        checks.push(check_multiplier_exhaustive());
    }
    let format = settings.format()?;
    checks.push(check_rotation_identity(10_000, format, &settings));

    // Double-precision path against the O(n^2) transform.
    let mut worst_rel = 0.0f64;
    for frame in &corpus {
        let fast = fft_r22_f64(frame, scaling).map_err(usage)?;
        let reference = dft_direct(frame, gain);
        let bits = n.trailing_zeros();
        let peak = reference.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (k, r) in reference.iter().enumerate() {
            let got = fast[slicefft::radix22::bit_reverse(k, bits)];
            worst_rel = worst_rel.max((got - r).norm() / peak.max(f64::MIN_POSITIVE));
        }
    }
    checks.push(check(
        "functional_vs_direct",
        worst_rel < 1e-9,
        format!("{} frames, max relative error {worst_rel:.3e}", corpus.len()),
    ));

    // Energy conservation at the configured gain.
    let mut worst_parseval = 0.0f64;
    for frame in &corpus {
        let fast = fft_r22_f64(frame, scaling).map_err(usage)?;
        let in_e: f64 = frame.iter().map(|c| c.norm_sqr()).sum();
        let out_e: f64 = fast.iter().map(|c| c.norm_sqr()).sum();
        let expect = gain * gain * n as f64 * in_e;
        worst_parseval = worst_parseval.max((out_e - expect).abs() / expect.max(f64::MIN_POSITIVE));
    }
    checks.push(check(
        "parseval",
        worst_parseval < 1e-9,
        format!("max relative energy error {worst_parseval:.3e}"),
    ));

    // The streaming pipeline must emit bit for bit what the in-place
    // fixed-point transform computes.
    let quantized: Vec<Vec<ComplexFixed>> = corpus
        .iter()
        .map(|f| {
            f.iter()
                .map(|c| ComplexFixed::quantize(c.re, c.im, format, settings.rounding))
                .collect()
        })
        .collect();
    let mut pipeline = SdfPipeline::new(config).map_err(usage)?;
    let result = pipeline.run_frames(&quantized, None).map_err(usage)?;
    let mut mismatches = 0usize;
    for (qin, out) in quantized.iter().zip(&result.frames) {
        let functional = fft_r22_fixed(qin, &settings.fft_params()).map_err(usage)?;
        for (a, b) in functional.samples.iter().zip(&out.samples) {
            if a.re.raw() != b.re.raw() || a.im.raw() != b.im.raw() {
                mismatches += 1;
            }
        }
    }
    checks.push(check(
        "pipeline_equals_functional",
        mismatches == 0,
        format!(
            "{} samples streamed, {mismatches} mismatches",
            corpus.len() * n
        ),
    ));

    // All-zero input leaves no residue anywhere in the pipeline.
    let zero_frame = vec![ComplexFixed::zero(format); n];
    let mut pipeline = SdfPipeline::new(config).map_err(usage)?;
    let zero_out = pipeline.run_frames(&[zero_frame], None).map_err(usage)?;
    let zero_ok = zero_out.frames[0]
        .samples
        .iter()
        .all(|s| s.re.raw() == 0 && s.im.raw() == 0);
    checks.push(check(
        "zero_input",
        zero_ok,
        "zero frame in, zero spectrum out".to_string(),
    ));

    // An impulse spreads equally into every bin, so the first output
    // cycle is observable and must land exactly at the advertised
    // latency.
    let mut pipeline = SdfPipeline::new(config).map_err(usage)?;
    let latency = pipeline.latency();
    let impulse: Vec<ComplexFixed> = (0..n)
        .map(|i| {
            if i == 0 {
                ComplexFixed::quantize(0.5, 0.0, format, settings.rounding)
            } else {
                ComplexFixed::zero(format)
            }
        })
        .collect();
    let mut first_nonzero = None;
    let total = n as u64 + latency;
    for cycle in 0..total {
        let input = impulse
            .get(cycle as usize)
            .copied()
            .unwrap_or_else(|| ComplexFixed::zero(format));
        let out = pipeline.tick(input).map_err(usage)?;
        if first_nonzero.is_none() && (out.re.raw() != 0 || out.im.raw() != 0) {
            first_nonzero = Some(cycle);
        }
    }
    checks.push(check(
        "latency",
        first_nonzero == Some(latency),
        format!("first output at cycle {first_nonzero:?}, advertised {latency}"),
    ));

    // Default 16-bit profile lands the impulse on exact bin values: the
    // stored coefficients never touch it thanks to the unity bypass.
    if n == 8
        && format == FixedFormat::q1_15()
        && settings.scaling
        && !settings.rotate_unity
    {
        let expected = 2048;
        let mut pipeline = SdfPipeline::new(config).map_err(usage)?;
        let out = pipeline.run_frames(std::slice::from_ref(&impulse), None).map_err(usage)?;
        let exact = out.frames[0]
            .samples
            .iter()
            .all(|s| s.re.raw() == expected && s.im.raw() == 0);
        checks.push(check(
            "impulse_exact",
            exact,
            format!("every bin must hold raw {expected} + 0j"),
        ));
    }

    // Narrowed coefficients stay inside their advertised width in every
    // rotation stage this length uses.
    let mut span = n;
    let mut rom_ok = true;
    let mut spans = Vec::new();
    while span >= 8 {
        let rom = TwiddleRom::generate(span, format, settings.rom_shift, settings.rounding)
            .map_err(usage)?;
        let bits = format.word_bits() - settings.rom_shift;
        let lo = -(1i64 << (bits - 1));
        let hi = (1i64 << (bits - 1)) - 1;
        rom_ok &= rom
            .entries()
            .iter()
            .all(|e| (lo..=hi).contains(&e.stored_re()) && (lo..=hi).contains(&e.stored_im()));
        spans.push(span);
        span /= 4;
    }
    checks.push(check(
        "rom_width",
        rom_ok,
        format!(
            "spans {spans:?} fit {} bits after shift {}",
            format.word_bits() - settings.rom_shift,
            settings.rom_shift
        ),
    ));

    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed { "pass" } else { "FAIL" };
        println!("check {}: {verdict} ({})", c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(CliError::Check(format!(
            "{failed} of {} checks failed",
            checks.len()
        )));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let mut settings = Settings::resolve(&args.common)?;
    if let Some(v) = args.seed {
        settings.seed = v;
    }
    if let Some(v) = args.frames {
        settings.frames = v;
    }
    if let Some(v) = args.amplitude {
        settings.amplitude = v;
    }
    let base = settings.pipeline_config()?;

    // Rows of (configuration label, measured point).
    let (column, rows): (&str, Vec<(String, metrics::SweepPoint)>) = match args.axis {
        SweepAxis::WordBits => {
            let Some(widths) = &args.widths else {
                return Err(CliError::Usage(
                    "the word-bits axis needs --widths LO..HI".into(),
                ));
            };
            let Some((lo, hi)) = widths.split_once("..") else {
                return Err(CliError::Usage(format!(
                    "widths {widths:?}: expected LO..HI, e.g. 10..16"
                )));
            };
            let lo: u32 = parse_value("widths", lo)?;
            let hi: u32 = parse_value("widths", hi)?;
            if lo > hi {
                return Err(CliError::Usage(format!("widths {lo}..{hi} is empty")));
            }
            let points = metrics::width_sweep(
                base,
                lo..=hi,
                settings.seed,
                settings.frames,
                settings.amplitude,
            )
            .map_err(usage)?;
            (
                "word_bits",
                points
                    .into_iter()
                    .map(|p| (p.word_bits.to_string(), p))
                    .collect(),
            )
        }
        SweepAxis::Rounding => {
            let mut rows = Vec::new();
            for (label, mode) in [
                ("half-away", Rounding::HalfAwayFromZero),
                ("truncate", Rounding::Truncate),
            ] {
                let mut config = base;
                config.fft.rounding = mode;
                let s = metrics::pipeline_sqnr(
                    config,
                    settings.seed,
                    settings.frames,
                    settings.amplitude,
                )
                .map_err(usage)?;
                rows.push((
                    label.to_string(),
                    metrics::SweepPoint {
                        word_bits: settings.word_bits,
                        sqnr_db: s.sqnr_db,
                        max_abs_error: s.max_abs_error,
                        saturations: s.saturations,
                    },
                ));
            }
            ("rounding", rows)
        }
        SweepAxis::BlockWidth => {
            let mut rows = Vec::new();
            for p in (1..=settings.word_bits).filter(|p| settings.word_bits.is_multiple_of(*p)) {
                let mut config = base;
                config.fft.bits_per_block = p;
                let s = metrics::pipeline_sqnr(
                    config,
                    settings.seed,
                    settings.frames,
                    settings.amplitude,
                )
                .map_err(usage)?;
                rows.push((
                    p.to_string(),
                    metrics::SweepPoint {
                        word_bits: settings.word_bits,
                        sqnr_db: s.sqnr_db,
                        max_abs_error: s.max_abs_error,
                        saturations: s.saturations,
                    },
                ));
            }
            ("bits_per_block", rows)
        }
    };

    let output_path = artifact_path(args.output, args.out.as_deref(), "sweep.csv")?;
    let mut w = open_output(output_path.as_deref())?;
    (|| -> Result<(), io::IoError> {
        writeln!(w, "{column},sqnr_db,max_abs_error,saturations")?;
        for (label, p) in &rows {
            writeln!(
                w,
                "{label},{:.6},{:.6e},{}",
                p.sqnr_db, p.max_abs_error, p.saturations
            )?;
        }
        w.flush()?;
        Ok(())
    })()
    .map_err(|e| CliError::File(e.to_string()))?;

    for (label, p) in &rows {
        eprintln!(
            "{column} {label:>9}: sqnr {:>8.3} dB, max abs error {:.3e}, saturations {}",
            p.sqnr_db, p.max_abs_error, p.saturations
        );
    }
    Ok(())
}

fn cmd_twiddle_dump(args: TwiddleDumpArgs) -> Result<(), CliError> {
    let settings = Settings::resolve(&args.common)?;
    settings.check_points()?;
    let format = settings.format()?;
    let rom = TwiddleRom::for_stage(
        settings.n,
        args.stage,
        format,
        settings.rom_shift,
        settings.rounding,
    )
    .map_err(|e| CliError::Usage(format!("n = {}, stage {}: {e}", settings.n, args.stage)))?;

    let output_path = artifact_path(args.output, args.out.as_deref(), "twiddle.csv")?;
    let mut w = open_output(output_path.as_deref())?;
    let fits = io::write_twiddle_dump(&mut w, &rom).map_err(|e| CliError::File(e.to_string()))?;
    w.flush().map_err(|e| CliError::File(e.to_string()))?;

    let bits = format.word_bits() - settings.rom_shift;
    if !fits {
        return Err(CliError::Check(format!(
            "a stored coefficient exceeds {bits} bits"
        )));
    }
    eprintln!(
        "stored width check: pass (span {}, {} entries fit {bits} bits)",
        rom.span(),
        rom.entries().len()
    );
    Ok(())
}
