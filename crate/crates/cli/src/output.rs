use std::path::{Path, PathBuf};

use heatsample_core::io::Table;
use serde_json::Value;

use crate::args::Format;
use crate::CliError;

/// Marker appended to tables cut short by an interrupt.
pub const TRUNCATED: &str = "# truncated\n";

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutDir {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_json(&self, name: &str, value: &Value) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json`.
    pub fn write_table(
        &self,
        stem: &str,
        table: &Table,
        format: Format,
        truncated: bool,
    ) -> Result<PathBuf, CliError> {
        match format {
            Format::Csv => {
                let mut text = table.to_csv();
                if truncated {
                    text.push_str(TRUNCATED);
                }
                self.write(&format!("{stem}.csv"), &text)
            }
            Format::Json => {
                let rows: Vec<Value> = table
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            table
                                .header
                                .iter()
                                .zip(r)
                                .map(|(h, v)| (h.clone(), cell(v)))
                                .collect(),
                        )
                    })
                    .collect();
                let doc = serde_json::json!({ "rows": rows, "truncated": truncated });
                self.write_json(&format!("{stem}.json"), &doc)
            }
        }
    }
}

/// Numbers stay numbers in JSON output; everything else is a string.
fn cell(v: &str) -> Value {
    if let Ok(i) = v.parse::<i64>() {
        return Value::from(i);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => Value::from(v),
    }
}
