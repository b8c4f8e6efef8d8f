//! Deterministic artifact serialization: report.json with fixed float
//! formatting, curve.csv with RFC-4180 quoting, and config hashing.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::{self, Write};

/// Identifier of the report layout this binary writes.
pub const REPORT_SCHEMA: &str = "dobrushin-report/1";

/// Fixed-width scientific float rendering: 17 significant digits, enough
/// to round-trip any f64 and stable across runs.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON formatter that renders every float via [`fmt_float`].
struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Serialize a JSON value deterministically: two-space indentation,
/// alphabetical keys (the map type is ordered), fixed float format, and a
/// trailing newline.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let formatter = SciFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut serializer = Serializer::with_formatter(&mut out, formatter);
    value
        .serialize(&mut serializer)
        .expect("serializing an in-memory JSON value cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Lowercase hex SHA-256 of the raw input bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Curve artifact: either a generic table or a preformatted CSV document.
#[derive(Debug, Clone)]
pub enum CurveData {
    /// Header plus rows of already-formatted fields.
    Table {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    /// A complete CSV document (header included) emitted verbatim.
    Raw(String),
}

impl CurveData {
    /// Render to CSV text with RFC-4180 quoting.
    pub fn to_csv(&self) -> String {
        match self {
            CurveData::Raw(text) => text.clone(),
            CurveData::Table { header, rows } => {
                let mut out = String::new();
                push_record(&mut out, header);
                for row in rows {
                    push_record(&mut out, row);
                }
                out
            }
        }
    }
}

fn push_record(out: &mut String, fields: &[String]) {
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&csv_escape(field));
    }
    out.push('\n');
}

/// Quote a CSV field when it contains a separator, quote, or line break.
pub fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Assemble the full report document around an analysis result body.
pub fn assemble_report(
    analysis: &str,
    raw_config: &str,
    seed: u64,
    certified: bool,
    body: Value,
) -> Value {
    serde_json::json!({
        "schema": REPORT_SCHEMA,
        "analysis": analysis,
        "certified": certified,
        "provenance": {
            "config_sha256": sha256_hex(raw_config.as_bytes()),
            "seed": seed,
            "library_version": env!("CARGO_PKG_VERSION"),
        },
        "result": body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_render_with_seventeen_significant_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(0.1353352832366127), "1.3533528323661270e-1");
        assert_eq!(fmt_float(-2.5e-1), "-2.5000000000000000e-1");
        let text = to_json_string(&json!({"x": 0.5, "n": 3_u64}));
        assert!(text.contains("5.0000000000000000e-1"), "got: {text}");
        assert!(text.contains("\"n\": 3"), "got: {text}");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn json_output_is_key_sorted_and_stable() {
        let a = to_json_string(&json!({"b": 1.0, "a": [1.0, 2.0], "c": {"z": true, "y": null}}));
        let b = to_json_string(&json!({"c": {"y": null, "z": true}, "a": [1.0, 2.0], "b": 1.0}));
        assert_eq!(a, b);
        let a_pos = a.find("\"a\"").unwrap();
        let b_pos = a.find("\"b\"").unwrap();
        assert!(a_pos < b_pos);
    }

    #[test]
    fn csv_quoting_follows_rfc_4180() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("with,comma"), "\"with,comma\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
        let curve = CurveData::Table {
            header: vec!["t".into(), "note,with comma".into()],
            rows: vec![vec!["1.0".into(), "ok".into()]],
        };
        assert_eq!(curve.to_csv(), "t,\"note,with comma\"\n1.0,ok\n");
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn report_envelope_carries_provenance() {
        let report = assemble_report("delta", "{}", 7, true, json!({"value": 0.5}));
        assert_eq!(report["schema"], REPORT_SCHEMA);
        assert_eq!(report["provenance"]["seed"], 7);
        assert_eq!(
            report["provenance"]["config_sha256"].as_str().unwrap().len(),
            64
        );
        assert_eq!(report["result"]["value"], 0.5);
    }
}
