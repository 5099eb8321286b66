//! Tabular output shared by every subcommand: CSV with a fixed header, or
//! JSON lines with one object per row and the same field names.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Null,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Num)
    }
}

/// Rounds to 9 significant digits. `-0` becomes `0`.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => round_sig9(*x).to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => "null".to_owned(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(x) => Number::from_f64(round_sig9(*x)).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Null => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, writer: W, emit: Emit) -> Result<()> {
        match emit {
            Emit::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(writer);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv_text))?;
                }
                w.flush()?;
            }
            Emit::Jsonl => {
                let mut w = BufWriter::new(writer);
                for row in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    serde_json::to_writer(&mut w, &obj)?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path, emit: Emit) -> Result<()> {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        self.write(file, emit)
    }
}

/// Rows read back from a file written by [`Table::write`], as JSON objects.
pub struct Records {
    pub rows: Vec<Map<String, Value>>,
}

impl Records {
    /// Detects JSON lines by a leading `{`, CSV otherwise.
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let mut reader = BufReader::new(file);
        let is_json = reader.fill_buf()?.first() == Some(&b'{');
        let mut rows = Vec::new();
        if is_json {
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let obj: Map<String, Value> = serde_json::from_str(&line)
                    .with_context(|| format!("{}: line {}", path.display(), i + 1))?;
                rows.push(obj);
            }
        } else {
            let mut r = csv::Reader::from_reader(reader);
            let header = r.headers()?.clone();
            for record in r.records() {
                let record = record?;
                let obj = header
                    .iter()
                    .zip(record.iter())
                    .map(|(k, v)| (k.to_owned(), csv_value(v)))
                    .collect();
                rows.push(obj);
            }
        }
        Ok(Self { rows })
    }
}

fn csv_value(text: &str) -> Value {
    match text {
        "null" | "" => Value::Null,
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => {
            if let Ok(i) = text.parse::<i64>() {
                Value::from(i)
            } else if let Ok(x) = text.parse::<f64>() {
                Number::from_f64(x).map_or(Value::Null, Value::Number)
            } else {
                Value::String(text.to_owned())
            }
        }
    }
}

pub fn get_f64(row: &Map<String, Value>, key: &str) -> Result<f64> {
    match row.get(key) {
        Some(v) => v
            .as_f64()
            .with_context(|| format!("field `{key}` is not a number")),
        None => bail!("missing field `{key}`"),
    }
}

pub fn get_i64(row: &Map<String, Value>, key: &str) -> Result<i64> {
    match row.get(key) {
        Some(v) => v
            .as_i64()
            .with_context(|| format!("field `{key}` is not an integer")),
        None => bail!("missing field `{key}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(round_sig9(2.0 / 3.0), 0.666666667);
        assert_eq!(round_sig9(1234567891234.0), 1234567890000.0);
        assert_eq!(round_sig9(-0.0).to_string(), "0");
        assert_eq!(round_sig9(2.0).to_string(), "2");
        assert_eq!(Cell::Num(1.0 / 3.0).csv_text(), "0.333333333");
    }

    #[test]
    fn csv_and_jsonl_carry_same_values() {
        let mut t = Table::new(vec!["i".into(), "x".into(), "z".into(), "flag".into()]);
        t.push(vec![
            Cell::Int(3),
            Cell::Num(1.0 / 7.0),
            Cell::Null,
            Cell::Bool(true),
        ]);
        t.push(vec![
            Cell::Int(4),
            Cell::Num(-2.5e-12),
            Cell::Num(0.0),
            Cell::Bool(false),
        ]);

        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("t.csv");
        let json_path = dir.path().join("t.jsonl");
        t.write_file(&csv_path, Emit::Csv).unwrap();
        t.write_file(&json_path, Emit::Jsonl).unwrap();

        let text = std::fs::read_to_string(&csv_path).unwrap();
        assert!(text.starts_with("i,x,z,flag\n3,0.142857143,null,true\n"));

        let a = Records::read(&csv_path).unwrap().rows;
        let b = Records::read(&json_path).unwrap().rows;
        assert_eq!(a.len(), 2);
        for (ra, rb) in a.iter().zip(&b) {
            for key in ["i", "x", "z", "flag"] {
                assert_eq!(ra[key].as_f64(), rb[key].as_f64(), "{key}");
                assert_eq!(ra[key].is_null(), rb[key].is_null());
                assert_eq!(ra[key].as_bool(), rb[key].as_bool());
            }
        }
    }
}
