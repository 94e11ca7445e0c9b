//! Report envelopes and their byte-stable JSON encoding.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const ARTIFACT: &str = "loewner";
pub const SCHEMA_VERSION: u32 = 1;

/// Pretty JSON with every float printed to 17 significant digits.
pub struct ExactFloats {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Default for ExactFloats {
    fn default() -> Self {
        ExactFloats { inner: serde_json::ser::PrettyFormatter::with_indent(b"  ") }
    }
}

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Encodes any serialisable value with [`ExactFloats`] and a trailing newline.
pub fn to_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFloats::default());
    value.serialize(&mut ser).map_err(|e| CliError::Format(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Converts a payload to a JSON tree.
pub fn payload<T: Serialize + ?Sized>(value: &T) -> Result<Value, CliError> {
    serde_json::to_value(value).map_err(|e| CliError::Format(e.to_string()))
}

/// The outcome of one run: config echo plus either a result or an error.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub artifact: &'static str,
    pub schema_version: u32,
    pub version: &'static str,
    pub command: String,
    pub config: std::collections::BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Value>,
}

impl Envelope {
    pub fn new(config: &RunConfig) -> Self {
        Envelope {
            artifact: ARTIFACT,
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION"),
            command: config.get("command").unwrap_or("").to_string(),
            config: config.entries().clone(),
            timing: None,
            result: None,
            error: None,
        }
    }

    pub fn with_result(mut self, result: Value) -> Self {
        self.result = Some(result);
        self
    }

    pub fn with_error(mut self, err: &CliError) -> Self {
        self.error = Some(json!({
            "kind": err.kind(),
            "exit_code": err.exit_code(),
            "message": err.to_string(),
            "diagnostics": err.diagnostics(),
        }));
        self
    }

    pub fn with_timing(mut self, seconds: f64, threads: usize) -> Self {
        self.timing = Some(json!({ "seconds": seconds, "threads": threads }));
        self
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        to_bytes(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let bytes = to_bytes(&json!({ "x": 0.1, "y": [1.0, -2.5e-300], "n": 3 })).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-2.5000000000000000e-300"));
        assert!(text.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_values_become_null() {
        let text = String::from_utf8(to_bytes(&[f64::NAN]).unwrap()).unwrap();
        assert!(text.contains("null"));
    }
}
