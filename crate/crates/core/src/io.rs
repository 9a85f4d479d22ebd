//! Plain-text signal files and small CSV helpers.

use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::GraphSignal;

/// Reads one real per line; blank lines and `#` comments are skipped.
pub fn parse_signal(text: &str, origin: &Path) -> Result<GraphSignal> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            message: format!("invalid value {line:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("non-finite value {line:?}"),
            });
        }
        values.push(v);
    }
    GraphSignal::from_vec(values)
}

pub fn load_signal(path: impl AsRef<Path>) -> Result<GraphSignal> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_signal(&text, path)
}

pub fn format_signal(x: &GraphSignal) -> String {
    x.values().iter().map(|v| format!("{v}\n")).collect()
}

pub fn save_signal(x: &GraphSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_signal(x)).map_err(|e| Error::io(path, e))
}

/// A header row plus data rows, rendered as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        render_csv(Some(&self.header), self.rows.iter())
    }
}

/// Renders string records as CSV, with an optional header record.
pub(crate) fn render_csv<R, S>(header: Option<&[String]>, rows: impl Iterator<Item = R>) -> String
where
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().flexible(false).from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h).expect("writing to memory");
    }
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}
