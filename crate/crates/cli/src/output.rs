//! Run records and their JSON / CSV serialisation.

use std::fs;
use std::io;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub tool: &'static str,
    pub version: &'static str,
    /// File stem of the outputs, e.g. `rh_solve`.
    pub name: String,
    pub config: Value,
    pub outputs: Value,
    /// Names of the CSV tables written next to the JSON.
    pub tables: Vec<String>,
    #[serde(skip)]
    pub csv: Vec<Table>,
}

/// A dense numeric table for CSV output.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows }
    }
}

/// `{:.16e}`: 17 significant digits, round-trip exact.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Pretty JSON whose floats carry 17 significant digits. Non-finite
/// numbers become `null`.
struct SigFigs(PrettyFormatter<'static>);

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_float(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

/// Compact one-line JSON with the same float format (for error reports).
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    struct Line(CompactFormatter);
    impl Formatter for Line {
        fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
            w.write_all(format_float(v).as_bytes())
        }
    }
    let mut buf = Vec::new();
    value.serialize(&mut serde_json::Serializer::with_formatter(&mut buf, Line(CompactFormatter)))?;
    Ok(String::from_utf8(buf)?)
}

fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>.json` and every table as `<name>_<table>.csv` under
/// `dir`, or the JSON to stdout when `dir` is `None`.
pub fn write_record(record: &RunRecord, dir: Option<&Path>) -> Result<()> {
    let json = to_json(record)?;
    let Some(dir) = dir else {
        print!("{json}");
        return Ok(());
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join(format!("{}.json", record.name)), json)?;
    for t in &record.csv {
        write_csv(t, &dir.join(format!("{}_{}.csv", record.name, t.name)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "y": f64::INFINITY, "n": 3})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("null"));
        assert!(s.contains("\"n\": 3"));
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"].as_f64(), Some(0.1));
        assert_eq!(format_float(-2.5), "-2.5000000000000000e0");
    }
}
