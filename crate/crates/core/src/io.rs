//! CSV and JSON interchange.
//!
//! CSV dialect: comma-separated, optional single header row (detected when
//! the first record has a non-numeric field), `.` decimal point. Rows and
//! columns in diagnostics are 1-based, counting the header if present.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::datagen::SampleMatrix;
use crate::error::{Error, Result};

/// Parsed CSV: optional header and numeric body.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Option<Vec<String>>,
    pub matrix: SampleMatrix,
}

fn parse_cell(field: &str) -> Option<f64> {
    let s = field.trim();
    if s.is_empty() {
        return None;
    }
    s.parse::<f64>().ok()
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut width = None;
    let mut data = Vec::new();
    let mut n_rows = 0usize;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Csv {
            row: line,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if i == 0 && rec.iter().any(|f| parse_cell(f).is_none()) {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(Error::Csv {
                    row: line,
                    column: rec.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", rec.len()),
                })
            }
            None => width = Some(rec.len()),
            _ => {}
        }
        for (j, f) in rec.iter().enumerate() {
            let v = parse_cell(f).ok_or_else(|| Error::Csv {
                row: line,
                column: j + 1,
                message: format!("non-numeric value {f:?}"),
            })?;
            data.push(v);
        }
        n_rows += 1;
    }
    let cols = width.unwrap_or(0);
    if n_rows == 0 || cols == 0 {
        return Err(Error::Shape("CSV contains no data rows".into()));
    }
    Ok(CsvTable {
        header,
        matrix: SampleMatrix::from_vec(n_rows, cols, data)?,
    })
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    read_csv_from(File::open(path)?)
}

/// Writes the matrix with an optional header; values use shortest round-trip formatting.
pub fn write_csv_to<W: Write>(m: &SampleMatrix, header: Option<&[String]>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    if let Some(h) = header {
        w.write_record(h).map_err(csv_err)?;
    }
    for row in m.iter_rows() {
        w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(m: &SampleMatrix, header: Option<&[String]>, path: &Path) -> Result<()> {
    write_csv_to(m, header, File::create(path)?)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Parses `"1.5,1.0"` or `"1.5 1.0"`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Error::Shape("empty vector".into()));
    }
    parts
        .iter()
        .enumerate()
        .map(|(j, s)| {
            parse_cell(s).ok_or_else(|| Error::Csv {
                row: 1,
                column: j + 1,
                message: format!("non-numeric value {s:?}"),
            })
        })
        .collect()
}
