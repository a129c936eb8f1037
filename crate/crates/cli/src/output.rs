//! Output sinks: CSV tables with a `#` footer, and JSON documents.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes a header plus one row per record, then the footer lines as
/// `#` comments.
pub fn write_csv<T: Serialize>(
    out: &mut dyn Write,
    header: &[String],
    rows: impl IntoIterator<Item = T>,
    footer: &[String],
) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *out);
        w.write_record(header).map_err(io_err)?;
        for row in rows {
            w.serialize(row).map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    for line in footer {
        writeln!(out, "# {line}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_json(out: &mut dyn Write, doc: &str) -> Result<(), CliError> {
    writeln!(out, "{doc}")
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}
