//! CSV and JSON serialization of sampled curves and tables.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use dqpt::RateSeries64;
use serde_json::{Map, Number, Value};

use crate::args::Format;
use crate::CliError;

/// Text form of one number: 17 significant digits, `inf`/`-inf`/`nan` literals.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_num(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
        "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
        "nan" | "NaN" => Ok(f64::NAN),
        t => t.parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")),
    }
}

/// JSON value of one number; non-finite values become strings.
pub fn json_num(x: f64) -> Value {
    match Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_num(x)),
    }
}

fn json_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_num(x)).collect())
}

fn json_to_num(v: &Value) -> Result<f64, String> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| format!("bad number {n}")),
        Value::String(s) => parse_num(s),
        other => Err(format!("expected a number, got {other}")),
    }
}

/// Renders a series as CSV (`t,lambda[,le]`) or JSON.
pub fn render_series(series: &RateSeries64, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from(if series.le.is_some() { "t,lambda,le\n" } else { "t,lambda\n" });
            for i in 0..series.len() {
                out.push_str(&fmt_num(series.times[i]));
                out.push(',');
                out.push_str(&fmt_num(series.lambda[i]));
                if let Some(le) = &series.le {
                    out.push(',');
                    out.push_str(&fmt_num(le[i]));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut obj = Map::new();
            let meta = series
                .metadata
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect();
            obj.insert("metadata".into(), Value::Object(meta));
            obj.insert("t".into(), json_array(&series.times));
            obj.insert("lambda".into(), json_array(&series.lambda));
            if let Some(le) = &series.le {
                obj.insert("le".into(), json_array(le));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

/// Writes `series` to `path` in `format`.
pub fn write_series(series: &RateSeries64, path: &Path, format: Format) -> io::Result<()> {
    fs::write(path, render_series(series, format))
}

/// Parses a file produced by [`write_series`]; the format is inferred from the content.
pub fn read_series(path: &Path) -> Result<RateSeries64, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_series(text: &str) -> Result<RateSeries64, String> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let column = |key: &str| -> Result<Option<Vec<f64>>, String> {
            match v.get(key) {
                None => Ok(None),
                Some(Value::Array(xs)) => xs.iter().map(json_to_num).collect::<Result<_, _>>().map(Some),
                Some(_) => Err(format!("'{key}' must be an array")),
            }
        };
        let metadata = match v.get("metadata") {
            Some(Value::Object(m)) => m
                .iter()
                .map(|(k, x)| (k.clone(), x.as_str().map_or_else(|| x.to_string(), str::to_string)))
                .collect(),
            _ => BTreeMap::new(),
        };
        let times = column("t")?.ok_or("missing 't'")?;
        let lambda = column("lambda")?.ok_or("missing 'lambda'")?;
        Ok(RateSeries64 {
            times,
            lambda,
            le: column("le")?,
            metadata,
        })
    } else {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty file")?;
        let with_le = match header.trim() {
            "t,lambda" => false,
            "t,lambda,le" => true,
            h => return Err(format!("unexpected header '{h}'")),
        };
        let (mut times, mut lambda, mut le) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != if with_le { 3 } else { 2 } {
                return Err(format!("bad row '{line}'"));
            }
            times.push(parse_num(cols[0])?);
            lambda.push(parse_num(cols[1])?);
            if with_le {
                le.push(parse_num(cols[2])?);
            }
        }
        Ok(RateSeries64 {
            times,
            lambda,
            le: with_le.then_some(le),
            metadata: BTreeMap::new(),
        })
    }
}

/// Table with named numeric columns; `None` cells print as `nan`.
pub fn render_table(columns: &[&str], rows: &[Vec<Option<f64>>], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = columns.join(",");
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| fmt_num(c.unwrap_or(f64::NAN))).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut obj = Map::new();
            for (j, name) in columns.iter().enumerate() {
                let col = rows
                    .iter()
                    .map(|r| r[j].map_or(Value::Null, json_num))
                    .collect();
                obj.insert((*name).to_string(), Value::Array(col));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

/// Sends `text` to `path`, or to `stdout` when no path is given.
pub fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}
