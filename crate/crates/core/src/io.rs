//! File formats: dense square similarity matrices as CSV/TSV with optional
//! header row and/or label column, and explicit matchings as "i j" pair lines.

use std::path::Path;

use crate::error::{Error, Result};
use crate::matching::Matching;

/// Read a dense square matrix. The delimiter (comma or tab) is sniffed from
/// the first line; a header row and/or leading label column is detected by
/// parse failure and stripped. Numeric labels are not recognized as headers.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_csv(&text)
}

pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let first_line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let delimiter = if first_line.contains('\t') {
        b'\t'
    } else {
        b','
    };

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<String> = record.iter().map(|s| s.to_string()).collect();
        if row.iter().all(|s| s.is_empty()) {
            continue;
        }
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }

    let numeric = |s: &String| s.parse::<f64>().is_ok();
    let header_row = cells[0].iter().skip(1).any(|s| !numeric(s));
    let header_col = cells.iter().skip(1).any(|row| !numeric(&row[0]));

    let rows = if header_row { &cells[1..] } else { &cells[..] };
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let data = if header_col { &row[1..] } else { &row[..] };
        let mut parsed = Vec::with_capacity(data.len());
        for (c, cell) in data.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!(
                    "cannot parse '{cell}' as a number at data row {}, column {}",
                    r + 1,
                    c + 1
                ))
            })?;
            parsed.push(v);
        }
        out.push(parsed);
    }
    Ok(out)
}

/// Read an explicit matching: one pair per line, `i j`, 1-based,
/// whitespace-separated. Blank lines and `#` comments are ignored.
pub fn read_matching_file(path: &Path, n: usize) -> Result<Matching> {
    let text = std::fs::read_to_string(path)?;
    parse_matching_text(&text, n)
}

pub fn parse_matching_text(text: &str, n: usize) -> Result<Matching> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |field: Option<&str>| -> Result<usize> {
            field
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'i j'", lineno + 1)))?
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("line {}: expected 'i j'", lineno + 1)))
        };
        let a = parse(fields.next())?;
        let b = parse(fields.next())?;
        if fields.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected exactly two indices",
                lineno + 1
            )));
        }
        pairs.push((a, b));
    }
    Matching::from_one_based_pairs(n, &pairs)
}
