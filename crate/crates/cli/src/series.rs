//! `date,value` series files.

use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    pub dates: Vec<String>,
    pub values: Vec<f64>,
}

/// ISO-8601 calendar date or year-month: `YYYY-MM-DD` or `YYYY-MM`.
fn is_iso_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('-').collect();
    let digits = |p: &str, n: usize| p.len() == n && p.bytes().all(|b| b.is_ascii_digit());
    match parts.as_slice() {
        [y, m] => digits(y, 4) && digits(m, 2) && (1..=12).contains(&m.parse::<u32>().unwrap()),
        [y, m, d] => {
            digits(y, 4)
                && digits(m, 2)
                && digits(d, 2)
                && (1..=12).contains(&m.parse::<u32>().unwrap())
                && (1..=31).contains(&d.parse::<u32>().unwrap())
        }
        _ => false,
    }
}

/// Read a headed `date,value` CSV. Rows are 1-based counting the header.
pub fn read_series(path: &Path) -> CliResult<DatedSeries> {
    let schema = |row: usize, column: usize, message: String| CliError::Schema {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => CliError::Config(format!("{}: {other:?}", path.display())),
        })?;
    let header = reader.headers()?.clone();
    let names: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
    if names != ["date", "value"] {
        return Err(schema(1, 1, format!("expected header `date,value`, found `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut out = DatedSeries {
        dates: Vec::new(),
        values: Vec::new(),
    };
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| schema(row, 1, e.to_string()))?;
        if rec.len() != 2 {
            return Err(schema(row, rec.len().min(3), format!("expected 2 fields, found {}", rec.len())));
        }
        let date = &rec[0];
        if !is_iso_date(date) {
            return Err(schema(row, 1, format!("`{date}` is not an ISO-8601 date")));
        }
        if out.dates.last().is_some_and(|prev| prev.as_str() >= date) {
            return Err(schema(row, 1, format!("date `{date}` is not after the previous row")));
        }
        let value: f64 = rec[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| schema(row, 2, format!("`{}` is not a finite number", &rec[1])))?;
        out.dates.push(date.to_string());
        out.values.push(value);
    }
    if out.values.is_empty() {
        return Err(schema(2, 1, "no data rows".into()));
    }
    Ok(out)
}

/// Both series must cover the same dates, row for row.
pub fn check_aligned(a: &DatedSeries, b: &DatedSeries, b_path: &Path) -> CliResult<()> {
    for (i, (da, db)) in a.dates.iter().zip(&b.dates).enumerate() {
        if da != db {
            return Err(CliError::Schema {
                path: b_path.to_path_buf(),
                row: i + 2,
                column: 1,
                message: format!("date `{db}` does not match `{da}` in the first series"),
            });
        }
    }
    if a.dates.len() != b.dates.len() {
        return Err(CliError::Schema {
            path: b_path.to_path_buf(),
            row: a.dates.len().min(b.dates.len()) + 2,
            column: 1,
            message: format!("{} rows against {} in the first series", b.dates.len(), a.dates.len()),
        });
    }
    Ok(())
}
