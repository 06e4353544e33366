//! Minimal deterministic CSV writer with RFC-4180-style quoting.

use std::fs;
use std::path::Path;

use crate::Result;

/// Writes one header row followed by the data rows. Fields containing a
/// comma, quote, or newline are quoted, with embedded quotes doubled.
pub fn write_csv(header: &[String], rows: &[Vec<String>], path: &Path) -> Result<()> {
    write_csv_with_comments(&[], header, rows, path)
}

/// Like `write_csv` but prefixed with `# `-style comment lines (used to
/// embed run fingerprints in report files).
pub fn write_csv_with_comments(
    comments: &[String],
    header: &[String],
    rows: &[Vec<String>],
    path: &Path,
) -> Result<()> {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&encode_row(header));
    out.push('\n');
    for row in rows {
        out.push_str(&encode_row(row));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn encode_row(fields: &[String]) -> String {
    fields.iter().map(|f| encode_field(f)).collect::<Vec<_>>().join(",")
}

fn encode_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
