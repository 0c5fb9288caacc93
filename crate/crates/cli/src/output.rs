//! Deterministic artifact writers: JSON with every float printed to 17
//! significant digits through a custom formatter, and CSV with '.'
//! decimals, comma separators, a header row and LF line endings. Two runs
//! with the same config and seed produce byte-identical files.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// 17 significant digits, scientific notation; valid JSON number syntax.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigFigFormatter;

impl Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{}", fmt_f64(value as f64))
    }
}

/// Serializes to compact JSON with fixed float formatting plus a trailing
/// newline.
pub fn to_json_string<T: Serialize>(value: &T) -> io::Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    std::fs::write(path, to_json_string(value)?)
}

/// A CSV cell: numbers via [`fmt_f64`], text quoted only when needed.
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            match cell {
                Cell::Num(v) => out.push_str(&fmt_f64(*v)),
                Cell::Int(v) => out.push_str(&v.to_string()),
                Cell::Text(s) => out.push_str(&csv_escape(s)),
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(fmt_f64(8.0 * std::f64::consts::PI), "2.5132741228718345e1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        // 1.5e-7 is not exactly representable; 17 digits expose that
        assert_eq!(fmt_f64(-1.5e-7), "-1.4999999999999999e-7");
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn json_floats_round_trip() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            label: String,
        }
        let s = to_json_string(&S {
            x: 2.0 * std::f64::consts::PI,
            label: "row".into(),
        })
        .unwrap();
        assert!(s.contains("6.2831853071795862e0") || s.contains("6.2831853071795865e0"));
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        let x = parsed["x"].as_f64().unwrap();
        assert!((x - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn csv_quoting_and_line_endings() {
        let dir = std::env::temp_dir().join("rotcap_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            &[vec![Cell::Text("x,y".into()), Cell::Num(1.0)]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n\"x,y\",1.0000000000000000e0\n");
        std::fs::remove_file(&path).ok();
    }
}
