use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::config::OutputFormat;
use super::run::{EstimateRow, ExperimentResult};

pub const CSV_HEADER: [&str; 5] = ["s", "method", "estimate", "std_error", "sqrt_wnrv"];

/// 17 significant digits, enough to round-trip any f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub fn write_csv<W: Write>(rows: &[EstimateRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for row in rows {
        w.write_record([
            fmt_f64(row.s),
            row.method.clone(),
            fmt_f64(row.estimate),
            fmt_f64(row.std_error),
            fmt_f64(row.sqrt_wnrv),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn to_csv_string(rows: &[EstimateRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Serialization(e.to_string()))
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<EstimateRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(csv_error)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Serialization(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let parse = |v: &str| -> Result<f64> {
        v.parse()
            .map_err(|_| Error::Serialization(format!("cannot parse {v:?} as a number")))
    };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok(EstimateRow {
                s: parse(&rec[0])?,
                method: rec[1].to_string(),
                estimate: parse(&rec[2])?,
                std_error: parse(&rec[3])?,
                sqrt_wnrv: parse(&rec[4])?,
            })
        })
        .collect()
}

pub fn to_json_string(result: &ExperimentResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn from_json_str(json: &str) -> Result<ExperimentResult> {
    serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))
}

/// Writes the table (CSV) or table plus metadata (JSON) to `path`.
pub fn emit(result: &ExperimentResult, path: &Path, format: OutputFormat) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::Serialization(
            "refusing to write an empty table".into(),
        ));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    match format {
        OutputFormat::Csv => write_csv(&result.rows, &mut out)?,
        OutputFormat::Json => {
            let json = to_json_string(result)?;
            out.write_all(json.as_bytes())
                .map_err(|e| Error::io(path, e))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}
