//! Shared CSV plumbing: comma-delimited, mandatory header, LF line endings.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// One parsed data row together with its 1-based line number in the file.
pub(crate) struct Row {
    pub line: u64,
    pub fields: csv::StringRecord,
}

/// Reads every data row after checking that the header matches `expected`.
pub(crate) fn read_rows<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Format("empty file".into()));
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let fields = record?;
        let line = fields.position().map(|p| p.line()).unwrap_or(0);
        if fields.len() != expected.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", expected.len(), fields.len()),
            });
        }
        rows.push(Row { line, fields });
    }
    Ok(rows)
}

pub(crate) fn parse_f64(row: &Row, col: usize, name: &str) -> Result<f64> {
    let raw = &row.fields[col];
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line: row.line,
            message: format!("{name}: `{raw}` is not a finite number"),
        }),
    }
}

/// Reads a two-column numeric table, e.g. `t_s,g_wm2`.
pub(crate) fn read_pairs<R: Read>(reader: R, header: [&str; 2]) -> Result<Vec<(u64, f64, f64)>> {
    read_rows(reader, &header)?
        .iter()
        .map(|row| {
            Ok((
                row.line,
                parse_f64(row, 0, header[0])?,
                parse_f64(row, 1, header[1])?,
            ))
        })
        .collect()
}

pub(crate) fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}
