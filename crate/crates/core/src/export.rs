//! Number formatting and CSV row reading shared by the file formats.

use std::path::Path;

use crate::{Error, Result};

/// Full-precision (shortest round-trip) formatting, or fixed `digits` after
/// the decimal point when rounding is requested.
pub fn fmt_num(x: f64, round: Option<usize>) -> String {
    match round {
        Some(digits) => format!("{x:.digits$}"),
        None => format!("{x}"),
    }
}

/// Reads CSV rows as trimmed fields with their 1-based line numbers.
/// Blank lines and `#` comments are skipped; rows may differ in length.
pub(crate) fn csv_rows(text: &str, origin: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    // Comment lines are blanked so record byte offsets still map to lines.
    let cleaned: String = text
        .lines()
        .map(|l| {
            if l.trim_start().starts_with('#') {
                ""
            } else {
                l
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(cleaned.as_bytes());
    // a record's byte offset sits before any blank lines the reader skipped
    let bytes = cleaned.as_bytes();
    let line_of = |pos: Option<&csv::Position>| {
        pos.map_or(0, |p| {
            let mut at = (p.byte() as usize).min(bytes.len());
            while at < bytes.len() && matches!(bytes[at], b'\n' | b'\r') {
                at += 1;
            }
            bytes[..at].iter().filter(|&&b| b == b'\n').count() + 1
        })
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| Error::parse(origin, line_of(e.position()), e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = line_of(record.position());
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

/// One CSV line with RFC 4180 quoting where needed.
pub(crate) fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(fields)
        .expect("writing to memory cannot fail");
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("fields were UTF-8")
}
