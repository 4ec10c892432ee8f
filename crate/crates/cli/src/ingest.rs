//! Delimited-text dataset ingestion.
//!
//! Two layouts are supported: one file whose last column is the target, or a
//! feature file plus a separate one-value-per-line label file. Fields are
//! comma-separated by default; `Delimiter::Whitespace` accepts runs of spaces
//! and tabs (and tolerates trailing blanks, as in the Madelon files).

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use umd_core::{Dataset, Matrix, Vector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataFormat {
    LastColumnTarget,
    SeparateLabels(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Byte(u8),
    Whitespace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub delimiter: Delimiter,
    pub has_header: bool,
    /// Multiplies every feature; targets are untouched.
    pub feature_scale: f64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: Delimiter::Byte(b','),
            has_header: false,
            feature_scale: 1.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: cannot parse {field:?} as a number")]
    Parse {
        path: PathBuf,
        line: u64,
        column: usize,
        field: String,
    },
    #[error("{path}:{line}: ragged row with {got} fields, expected {expected}")]
    Ragged {
        path: PathBuf,
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("{path}: {message}")]
    Shape { path: PathBuf, message: String },
}

/// Rows of numbers with the 1-based line each came from.
type Rows = Vec<(u64, Vec<f64>)>;

fn parse_field(path: &Path, line: u64, column: usize, raw: &str) -> Result<f64, IngestError> {
    let field = raw.trim();
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            field: field.to_string(),
        }),
    }
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_delimited(path: &Path, delimiter: u8, has_header: bool) -> Result<Rows, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => IngestError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => IngestError::Shape {
                path: path.to_path_buf(),
                message: e.to_string(),
            },
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(i, f)| parse_field(path, line, i + 1, f))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn read_whitespace(path: &Path, has_header: bool) -> Result<Rows, IngestError> {
    let reader = BufReader::new(open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let text = line.map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let number = i as u64 + 1;
        if (has_header && i == 0) || text.trim().is_empty() {
            continue;
        }
        let values = text
            .split_whitespace()
            .enumerate()
            .map(|(c, f)| parse_field(path, number, c + 1, f))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((number, values));
    }
    Ok(rows)
}

fn read_rows(path: &Path, options: &IngestOptions) -> Result<Rows, IngestError> {
    let rows = match options.delimiter {
        Delimiter::Byte(b) => read_delimited(path, b, options.has_header)?,
        Delimiter::Whitespace => read_whitespace(path, options.has_header)?,
    };
    let Some((_, first)) = rows.first() else {
        return Err(IngestError::Shape {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    };
    let width = first.len();
    if let Some((line, row)) = rows.iter().find(|(_, r)| r.len() != width) {
        return Err(IngestError::Ragged {
            path: path.to_path_buf(),
            line: *line,
            expected: width,
            got: row.len(),
        });
    }
    Ok(rows)
}

/// Reads a dataset and applies `feature_scale` to the design matrix.
pub fn ingest_csv(path: &Path, format: &DataFormat, options: &IngestOptions) -> Result<Dataset, IngestError> {
    let rows = read_rows(path, options)?;
    let width = rows[0].1.len();
    let (features, targets): (Vec<Vec<f64>>, Vec<f64>) = match format {
        DataFormat::LastColumnTarget => {
            if width < 2 {
                return Err(IngestError::Shape {
                    path: path.to_path_buf(),
                    message: "last-column-target needs at least two columns".into(),
                });
            }
            rows.into_iter()
                .map(|(_, mut r)| {
                    let y = r.pop().expect("width >= 2");
                    (r, y)
                })
                .unzip()
        }
        DataFormat::SeparateLabels(label_path) => {
            let labels = read_rows(label_path, &IngestOptions { has_header: false, ..options.clone() })?;
            if labels[0].1.len() != 1 {
                return Err(IngestError::Shape {
                    path: label_path.clone(),
                    message: format!("expected one label per line, got {} fields", labels[0].1.len()),
                });
            }
            if labels.len() != rows.len() {
                return Err(IngestError::Shape {
                    path: label_path.clone(),
                    message: format!("{} labels for {} feature rows", labels.len(), rows.len()),
                });
            }
            rows.into_iter()
                .zip(labels)
                .map(|((_, r), (_, l))| (r, l[0]))
                .unzip()
        }
    };
    let n = features.len();
    let d = features[0].len();
    let data: Vec<f64> = features
        .into_iter()
        .flatten()
        .map(|v| v * options.feature_scale)
        .collect();
    let shape_err = |e: umd_core::UmdError| IngestError::Shape {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let a = Matrix::new(n, d, data).map_err(shape_err)?;
    Dataset::new(a, Vector::from_vec(targets)).map_err(shape_err)
}
