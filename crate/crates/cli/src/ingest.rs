//! Delimited-text input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use sha2::{Digest, Sha256};
use thiserror::Error;

use rank_indep::DataPair;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Delimiter {
    /// Tab if the first line has one, else comma, else semicolon.
    #[default]
    Auto,
    Comma,
    Tab,
    Semicolon,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum HeaderMode {
    /// A header is assumed when some field of the first row is not a number.
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestOptions {
    pub delimiter: Delimiter,
    pub header: HeaderMode,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: file is empty", path.display())]
    EmptyFile { path: PathBuf },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}:{line}: expected {expected} fields, found {found}", path.display())]
    Ragged {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{}:{line}:{col}: cannot parse `{value}` as a finite number", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        value: String,
    },
    #[error(transparent)]
    Data(#[from] rank_indep::Error),
}

/// A numeric table, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub rows: usize,
    /// SHA-256 of the file bytes, hex.
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ingested {
    pub data: DataPair,
    pub x: Table,
    pub y: Table,
}

fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains('\t') {
        b'\t'
    } else if first.contains(',') {
        b','
    } else if first.contains(';') {
        b';'
    } else {
        b','
    }
}

fn parse_finite(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_table(path: &Path, opts: IngestOptions) -> Result<Table, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
    })?;
    if text.trim().is_empty() {
        return Err(IngestError::EmptyFile { path: path.to_path_buf() });
    }
    let delimiter = match opts.delimiter {
        Delimiter::Auto => detect_delimiter(&text),
        Delimiter::Comma => b',',
        Delimiter::Tab => b'\t',
        Delimiter::Semicolon => b';',
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|source| IngestError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let line = rec.position().map_or(records.len() + 1, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(IngestError::EmptyFile { path: path.to_path_buf() });
    };
    let has_header = match opts.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => first.iter().any(|f| f.parse::<f64>().is_err()),
    };
    let width = first.len();
    let names: Vec<String> = if has_header {
        first.iter().map(str::to_string).collect()
    } else {
        (1..=width).map(|c| format!("c{c}")).collect()
    };
    let body = &records[usize::from(has_header)..];
    if body.is_empty() {
        return Err(IngestError::EmptyFile { path: path.to_path_buf() });
    }
    let mut columns = vec![Vec::with_capacity(body.len()); width];
    for (line, rec) in body {
        if rec.len() != width {
            return Err(IngestError::Ragged {
                path: path.to_path_buf(),
                line: *line,
                expected: width,
                found: rec.len(),
            });
        }
        for (c, field) in rec.iter().enumerate() {
            let v = parse_finite(field).ok_or_else(|| IngestError::Parse {
                path: path.to_path_buf(),
                line: *line,
                col: c + 1,
                value: field.to_string(),
            })?;
            columns[c].push(v);
        }
    }
    Ok(Table {
        names,
        columns,
        rows: body.len(),
        digest: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

/// Reads both sides; the row counts must agree.
pub fn ingest_csv(path_x: &Path, path_y: &Path, opts: IngestOptions) -> Result<Ingested, IngestError> {
    let x = read_table(path_x, opts)?;
    let y = read_table(path_y, opts)?;
    let data = DataPair::from_columns(x.columns.clone(), y.columns.clone())?;
    Ok(Ingested { data, x, y })
}
