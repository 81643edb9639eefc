//! End-to-end checks of the command-line binary: exit codes, file
//! formats, flag precedence, and agreement with the library.

use num_complex::Complex64;
use slicefft::fixedpoint::{ComplexFixed, FixedFormat, Rounding};
use slicefft::radix22::{bit_reverse_permute, fft_r22_fixed, FixedFftParams};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slicefft"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slicefft-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

fn read_samples_file(path: &Path) -> Vec<Complex64> {
    let text = fs::read_to_string(path).unwrap();
    slicefft::io::read_samples(text.as_bytes()).unwrap()
}

#[test]
fn verify_default_profile_passes() {
    let out = run_ok(bin().args(["verify", "--frames", "8"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("all 9 checks passed"), "{stdout}");
    assert!(stdout.contains("check multiplier_random: pass"), "{stdout}");
    assert!(stdout.contains("check rotation_identity: pass"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn verify_exhaustive_covers_every_byte_pair() {
    let out = run_ok(bin().args(["verify", "--level", "exhaustive", "--frames", "4"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("check multiplier_exhaustive: pass (65536"),
        "{stdout}"
    );
    assert!(stdout.contains("all 10 checks passed"), "{stdout}");
}

#[test]
fn injected_fault_fails_verification_with_counterexample() {
    let out = bin()
        .args(["verify", "--frames", "4", "--inject-fault", "0:2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("check multiplier_random: FAIL"), "{stdout}");
    assert!(stdout.contains("counterexample"), "{stdout}");
    assert!(stdout.contains("expected"), "{stdout}");
    assert!(stdout.contains("got"), "{stdout}");
}

#[test]
fn run_output_matches_library_bit_for_bit() {
    let dir = scratch("run-matches");
    let input_path = dir.join("input.csv");
    let output_path = dir.join("output.csv");

    // Two frames of fixed data, written through the library writer.
    let n = 8;
    let input: Vec<Complex64> = (0..2 * n)
        .map(|i| Complex64::new(0.3 * ((i % 5) as f64 - 2.0) / 2.0, -0.25 + 0.05 * i as f64 / 2.0))
        .collect();
    {
        let mut buf = Vec::new();
        slicefft::io::write_samples(&mut buf, &input).unwrap();
        fs::write(&input_path, buf).unwrap();
    }

    run_ok(bin().args([
        "run",
        "--input",
        input_path.to_str().unwrap(),
        "--output",
        output_path.to_str().unwrap(),
        "--natural-order",
    ]));

    let format = FixedFormat::q1_15();
    let params = FixedFftParams::default_16bit();
    let mut expected = Vec::new();
    for frame in input.chunks(n) {
        let q: Vec<ComplexFixed> = frame
            .iter()
            .map(|c| ComplexFixed::quantize(c.re, c.im, format, Rounding::HalfAwayFromZero))
            .collect();
        let spectrum = fft_r22_fixed(&q, &params).unwrap();
        let tagged = slicefft::radix22::Frame {
            samples: spectrum.samples,
            domain: slicefft::radix22::Domain::Frequency,
            ordering: slicefft::radix22::Ordering::BitReversed,
        };
        expected.extend(
            bit_reverse_permute(&tagged)
                .samples
                .iter()
                .map(ComplexFixed::to_complex64),
        );
    }

    let got = read_samples_file(&output_path);
    assert_eq!(got, expected);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn trace_is_identical_across_reruns() {
    let dir = scratch("trace-rerun");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        run_ok(bin().args([
            "run",
            "--seed",
            "42",
            "--frames",
            "3",
            "--trace",
            path.to_str().unwrap(),
            "--output",
            dir.join("out.csv").to_str().unwrap(),
        ]));
    }
    let ta = fs::read(&a).unwrap();
    let tb = fs::read(&b).unwrap();
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn twiddle_dump_prints_narrowed_rom() {
    let dir = scratch("twiddle");
    let path = dir.join("rom.csv");
    let out = run_ok(bin().args(["twiddle-dump", "--n", "8", "--output", path.to_str().unwrap()]));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("pass"), "{stderr}");

    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "k,exponent,stored_re,stored_im,exact_re,exact_im");
    assert!(lines[1].starts_with("0,0,511,0,"));
    assert!(lines[4].starts_with("3,2,0,-512,"));
    assert!(lines[6].starts_with("5,1,362,-363,"));
    assert!(lines[8].starts_with("7,3,-363,-363,"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn twiddle_dump_without_shift_is_plain_quantization() {
    let dir = scratch("twiddle-shift0");
    let path = dir.join("rom.csv");
    run_ok(bin().args([
        "twiddle-dump",
        "--n",
        "8",
        "--rom-shift",
        "0",
        "--output",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&path).unwrap();
    // Unshifted storage holds the full 16-bit quantization of each
    // coefficient: 1 -> 32767 (saturated top), -j -> -32768.
    assert!(text.contains("0,0,32767,0,"), "{text}");
    assert!(text.contains("3,2,0,-32768,"), "{text}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn twiddle_dump_covers_sixteen_slot_stage() {
    let dir = scratch("twiddle-16");
    let path = dir.join("rom.csv");
    run_ok(bin().args([
        "twiddle-dump",
        "--n",
        "16",
        "--stage",
        "0",
        "--output",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);

    // Quarter order: bypass, even exponents, singles, triples.
    let exponents: Vec<u32> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(
        exponents,
        [0, 0, 0, 0, 0, 2, 4, 6, 0, 1, 2, 3, 0, 3, 6, 9]
    );

    // Narrowing costs at most one shifted LSB per component.
    let lsb = f64::powi(2.0, 6 - 15);
    for row in &rows {
        let stored_re: f64 = row[2].parse().unwrap();
        let stored_im: f64 = row[3].parse().unwrap();
        let exact_re: f64 = row[4].parse().unwrap();
        let exact_im: f64 = row[5].parse().unwrap();
        let back_re = stored_re * lsb;
        let back_im = stored_im * lsb;
        assert!((back_re - exact_re).abs() <= lsb, "{row:?}");
        assert!((back_im - exact_im).abs() <= lsb, "{row:?}");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_covers_inclusive_range() {
    let dir = scratch("sweep");
    let path = dir.join("sweep.csv");
    run_ok(bin().args([
        "sweep",
        "--widths",
        "12..14",
        "--frames",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "word_bits,sqnr_db,max_abs_error,saturations");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("12,"));
    assert!(lines[3].starts_with("14,"));
    fs::remove_dir_all(&dir).ok();
}

fn sweep_rows(args: &[&str]) -> Vec<(String, f64, f64, u64)> {
    let out = run_ok(bin().arg("sweep").args(args));
    let text = String::from_utf8(out.stdout).unwrap();
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (
                f[0].to_string(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn rounding_sweep_keeps_truncation_close() {
    let rows = sweep_rows(&["--axis", "rounding", "--frames", "64"]);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].0, "half-away");
    assert_eq!(rows[1].0, "truncate");
    let (half_away, truncate) = (rows[0].1, rows[1].1);
    assert!(
        truncate <= half_away + 0.5,
        "truncate {truncate} dB too far above half-away {half_away} dB"
    );
}

#[test]
fn block_width_sweep_is_accuracy_neutral() {
    // Slicing refactors the multiplier without changing its value, so
    // every block width that tiles the word lands on identical numbers.
    let rows = sweep_rows(&["--axis", "block-width", "--frames", "8"]);
    let widths: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    assert_eq!(widths, ["1", "2", "4", "8", "16"]);
    for row in &rows[1..] {
        assert_eq!(row.1, rows[0].1, "sqnr diverged at block width {}", row.0);
        assert_eq!(row.2, rows[0].2);
    }
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("precedence");
    let conf = dir.join("model.conf");
    let report = dir.join("report.csv");
    fs::write(&conf, "n = 16\nseed = 9\n").unwrap();
    run_ok(bin().args([
        "run",
        "--config",
        conf.to_str().unwrap(),
        "--n",
        "8",
        "--frames",
        "1",
        "--output",
        dir.join("out.csv").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("\nn,8\n"), "{text}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn fault_injection_perturbs_the_spectrum() {
    let dir = scratch("fault");
    let clean = dir.join("clean.csv");
    let faulty = dir.join("faulty.csv");
    let common = ["run", "--seed", "5", "--frames", "2"];
    run_ok(bin().args(common).args(["--output", clean.to_str().unwrap()]));
    run_ok(bin().args(common).args([
        "--output",
        faulty.to_str().unwrap(),
        "--inject-fault",
        "s2.tw:0:3",
    ]));
    assert_ne!(fs::read(&clean).unwrap(), fs::read(&faulty).unwrap());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes_separate_failure_classes() {
    // Settings the model rejects: usage.
    assert_eq!(exit_code(bin().args(["run", "--n", "7"])), 2);
    // Power of two but below the supported floor: usage.
    assert_eq!(exit_code(bin().args(["run", "--n", "4"])), 2);
    // Slice layout that does not tile the word: usage.
    assert_eq!(
        exit_code(bin().args(["run", "--word-bits", "12", "--blocks", "4"])),
        2
    );
    assert_eq!(exit_code(bin().args(["run", "--bits-per-block", "5"])), 2);
    // Width axis without a range: usage.
    assert_eq!(exit_code(bin().args(["sweep", "--axis", "word-bits"])), 2);
    // Empty sweep range: usage.
    assert_eq!(exit_code(bin().args(["sweep", "--widths", "16..10"])), 2);
    // Unknown config key: usage.
    let dir = scratch("codes");
    let conf = dir.join("bad.conf");
    fs::write(&conf, "frobnicate = 1\n").unwrap();
    assert_eq!(
        exit_code(bin().args(["run", "--config", conf.to_str().unwrap()])),
        2
    );
    // Unreadable input: file trouble.
    assert_eq!(
        exit_code(bin().args(["run", "--input", "/nonexistent/input.csv"])),
        3
    );
    // Input not a multiple of n: usage.
    let short = dir.join("short.csv");
    fs::write(&short, "index,re,im\n0,0.1,0.0\n").unwrap();
    assert_eq!(
        exit_code(bin().args(["run", "--n", "8", "--input", short.to_str().unwrap()])),
        2
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn impulse_generator_spreads_into_equal_bins() {
    let dir = scratch("impulse");
    let path = dir.join("spectrum.csv");
    run_ok(bin().args([
        "run",
        "--input",
        "impulse",
        "--frames",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]));
    let bins = read_samples_file(&path);
    assert_eq!(bins.len(), 8);
    let first = bins[0];
    assert!(first.re > 0.0);
    assert_eq!(first.im, 0.0);
    assert!(bins.iter().all(|b| *b == first), "{bins:?}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sine_generator_concentrates_in_one_bin_pair() {
    let dir = scratch("sine");
    let path = dir.join("spectrum.csv");
    run_ok(bin().args([
        "run",
        "--input",
        "sine",
        "--frames",
        "1",
        "--natural-order",
        "--output",
        path.to_str().unwrap(),
    ]));
    let bins = read_samples_file(&path);
    assert_eq!(bins.len(), 8);
    // A real one-cycle tone lands in bins 1 and n-1 as a conjugate
    // pair; everything else is rounding residue.
    let peak = bins[1].norm();
    assert!(peak > 0.2, "{bins:?}");
    assert!((bins[7] - bins[1].conj()).norm() < 1e-3, "{bins:?}");
    for (k, bin) in bins.iter().enumerate() {
        if k != 1 && k != 7 {
            assert!(bin.norm() < peak / 100.0, "bin {k} holds {bin}");
        }
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn seeded_runs_reproduce_byte_for_byte() {
    let dir = scratch("seeded");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        run_ok(bin().args([
            "run",
            "--seed",
            "7",
            "--frames",
            "4",
            "--output",
            path.to_str().unwrap(),
        ]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn out_dir_collects_default_artifacts() {
    let dir = scratch("outdir");
    let out = dir.join("artifacts");
    run_ok(bin().args(["run", "--frames", "2", "--out", out.to_str().unwrap()]));
    for name in ["spectra.csv", "trace.csv", "report.csv"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn narrow_word_run_loses_accuracy() {
    let dir = scratch("narrow");
    let sqnr = |args: &[&str]| -> f64 {
        let report = dir.join(format!("report-{}.csv", args.join("")));
        run_ok(
            bin()
                .args(["run", "--frames", "8", "--report", report.to_str().unwrap()])
                .args(args)
                .args(["--output", dir.join("out.csv").to_str().unwrap()]),
        );
        let text = fs::read_to_string(&report).unwrap();
        let row = text.lines().find(|l| l.starts_with("sqnr_db,")).unwrap();
        row.split_once(',').unwrap().1.parse().unwrap()
    };
    let wide = sqnr(&[]);
    let narrow = sqnr(&["--word-bits", "12", "--slice-b", "3", "--slice-p", "4"]);
    assert!(
        narrow + 6.0 < wide,
        "12-bit run at {narrow} dB not clearly below 16-bit at {wide} dB"
    );
    fs::remove_dir_all(&dir).ok();
}
