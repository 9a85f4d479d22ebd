//! `key = value` config files, spliced into the argument list so that they
//! go through the same parser as the flags they mirror.

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

/// Parses a config file into `(key, value)` pairs in file order.
pub fn parse(text: &str, origin: &Path) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected `key = value`",
                origin.display(),
                idx + 1
            )));
        };
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "{}:{}: invalid key {key:?}",
                origin.display(),
                idx + 1
            )));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Locates `--config FILE` (or `--config=FILE`) in `argv`.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

const SUBCOMMANDS: [&str; 7] = ["graph", "coherence", "sample", "recover", "phase", "noisy", "bounds"];

/// Inserts config entries right after the subcommand name, so that any
/// later occurrence of the same flag on the command line wins.
pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let entries = parse(&text, path)?;
    let Some(pos) = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(argv);
    };
    let mut injected = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => injected.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                injected.push(format!("--{key}").into());
                injected.push(value.into());
            }
        }
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}
