//! Output formatting shared by the CLI and the FFI layer.
//!
//! Floats are written with 17 significant digits so values round-trip exactly.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// `x` with 17 significant digits in scientific notation. Negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with struct fields in declaration order and 17-digit floats.
/// Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Anything the CLI can print.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;
}

pub fn render(report: &impl Report, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let mut s = to_json(report);
            s.push('\n');
            s
        }
    }
}

/// Writes the rendered report to `path`, or to stdout when `path` is `None`.
pub fn emit(report: &impl Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(report, format);
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Outcome of one verification suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub worst_case: f64,
    pub pass: bool,
}

impl Report for VerificationReport {
    fn to_csv(&self) -> String {
        format!("suite,trials,worst_case,pass\n{},{},{},{}\n", self.suite, self.trials, fmt_f64(self.worst_case), self.pass)
    }
}
