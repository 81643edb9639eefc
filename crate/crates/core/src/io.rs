//! Text formats: sample CSV, trace CSV, coefficient ROM dumps, report
//! files, and the `key = value` configuration format.
//!
//! Sample files are real-valued with a global running index:
//!
//! ```text
//! index,re,im
//! 0,0.5,0.0
//! 1,-0.25,0.125
//! ```
//!
//! Comment lines start with `#`. Values use the shortest representation
//! that parses back to the identical double, so a write/read cycle is
//! lossless.

use crate::complex_mult::TwiddleRom;
use crate::sdf_pipeline::Trace;
use num_complex::Complex64;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

/// Read a sample stream: rows `index, re, im` with the index running from
/// zero without gaps. An optional header row is recognized and skipped.
pub fn read_samples(reader: impl BufRead) -> Result<Vec<Complex64>, IoError> {
    let mut samples = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                lineno,
                format!("expected 3 comma-separated fields, found {}", fields.len()),
            ));
        }
        if samples.is_empty() && fields[0].parse::<usize>().is_err() {
            // Header row.
            continue;
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad index {:?}", fields[0])))?;
        if index != samples.len() {
            return Err(parse_err(
                lineno,
                format!("index {index} out of sequence, expected {}", samples.len()),
            ));
        }
        let re: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad real value {:?}", fields[1])))?;
        let im: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad imaginary value {:?}", fields[2])))?;
        samples.push(Complex64::new(re, im));
    }
    Ok(samples)
}

/// Write a sample stream in the format [`read_samples`] accepts.
pub fn write_samples(mut writer: impl Write, samples: &[Complex64]) -> Result<(), IoError> {
    writeln!(writer, "index,re,im")?;
    for (i, s) in samples.iter().enumerate() {
        writeln!(writer, "{i},{},{}", s.re, s.im)?;
    }
    Ok(())
}

/// Write a pipeline trace: one row per recorded signal per cycle.
pub fn write_trace(mut writer: impl Write, trace: &Trace) -> Result<(), IoError> {
    writeln!(writer, "cycle,stage,signal,re_raw,im_raw")?;
    for row in &trace.rows {
        writeln!(
            writer,
            "{},{},{},{},{}",
            row.cycle,
            trace.stage_names[row.stage],
            row.signal.as_str(),
            row.re_raw,
            row.im_raw
        )?;
    }
    Ok(())
}

/// Write a coefficient ROM with stored and exact values side by side.
/// Returns false if any stored component falls outside the ROM's narrowed
/// width, which the generator is supposed to make impossible.
pub fn write_twiddle_dump(mut writer: impl Write, rom: &TwiddleRom) -> Result<bool, IoError> {
    writeln!(writer, "k,exponent,stored_re,stored_im,exact_re,exact_im")?;
    let bits = rom.format().word_bits() - rom.shift();
    let lo = -(1i64 << (bits - 1));
    let hi = (1i64 << (bits - 1)) - 1;
    let mut all_fit = true;
    for (k, e) in rom.entries().iter().enumerate() {
        writeln!(
            writer,
            "{k},{},{},{},{},{}",
            e.exponent(),
            e.stored_re(),
            e.stored_im(),
            e.exact().re,
            e.exact().im
        )?;
        all_fit &= e.stored_re() >= lo
            && e.stored_re() <= hi
            && e.stored_im() >= lo
            && e.stored_im() <= hi;
    }
    Ok(all_fit)
}

/// Write a two-column `metric,value` report.
pub fn write_report<'a>(
    mut writer: impl Write,
    rows: impl IntoIterator<Item = (&'a str, String)>,
) -> Result<(), IoError> {
    writeln!(writer, "metric,value")?;
    for (metric, value) in rows {
        writeln!(writer, "{metric},{value}")?;
    }
    Ok(())
}

/// Parse `key = value` configuration text. `#` starts a comment; blank
/// lines are skipped; a key may appear once.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, IoError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(lineno, format!("expected key = value, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(parse_err(lineno, "empty key or value"));
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(parse_err(lineno, format!("duplicate key {key:?}")));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}
