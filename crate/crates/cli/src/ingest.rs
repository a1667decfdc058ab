use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, Trim};
use thiserror::Error;
use volsel_core::RealMatrix;

/// Row and column numbers are 1-based and count the header line, if any,
/// so they match what an editor shows.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV near line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("row {row}, column {col}: cannot parse {value:?} as a number")]
    ParseError { row: usize, col: usize, value: String },
    #[error("row {row} has {found} columns, expected {expected}")]
    NonRectangular { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: value {value} is not finite")]
    NonFinite { row: usize, col: usize, value: f64 },
    #[error("no numeric rows found")]
    Empty,
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<RealMatrix, IngestError> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<RealMatrix, IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = idx + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        // a first row that is not entirely numeric is a header
        if idx == 0 && parsed.iter().any(Result::is_err) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(IngestError::NonRectangular {
                row,
                expected,
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(expected);
        for (c, (field, value)) in record.iter().zip(parsed).enumerate() {
            let value = value.map_err(|_| IngestError::ParseError {
                row,
                col: c + 1,
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(IngestError::NonFinite { row, col: c + 1, value });
            }
            values.push(value);
        }
        rows.push(values);
    }
    if rows.is_empty() || width == Some(0) {
        return Err(IngestError::Empty);
    }
    Ok(RealMatrix::from_rows(&rows).expect("rows are rectangular and finite"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        assert_eq!(parse_csv("1,0\n0,1\n").unwrap(), RealMatrix::identity(2));
    }

    #[test]
    fn header_is_skipped() {
        let m = parse_csv("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(m, RealMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
    }

    #[test]
    fn ragged_rows() {
        assert!(matches!(
            parse_csv("1,2\n3\n"),
            Err(IngestError::NonRectangular { row: 2, expected: 2, found: 1 })
        ));
    }

    #[test]
    fn bad_cell_reports_position() {
        match parse_csv("x,y\n1,2\n3,oops\n") {
            Err(IngestError::ParseError { row, col, value }) => {
                assert_eq!((row, col, value.as_str()), (3, 2, "oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite() {
        assert!(matches!(parse_csv("1,inf\n"), Err(IngestError::NonFinite { row: 1, col: 2, .. })));
        assert!(matches!(parse_csv("NaN,1\n"), Err(IngestError::NonFinite { .. })));
    }

    #[test]
    fn whitespace_and_blank_lines() {
        let m = parse_csv(" 1 , 2\n\n3,4 \n").unwrap();
        assert_eq!(m.rows(), 2);
        assert!(matches!(parse_csv("a,b\n"), Err(IngestError::Empty)));
        assert!(matches!(parse_csv(""), Err(IngestError::Empty)));
    }
}
