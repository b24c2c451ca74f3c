use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Outcome of one CLI invocation. Contains no wall-clock fields, so equal
/// inputs give byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario_path: Option<String>,
    pub results: Value,
    pub artifacts: Vec<String>,
    pub tool_version: String,
}

impl RunReport {
    pub fn new(command: &str, scenario_path: Option<&Path>, results: Value) -> Self {
        Self {
            command: command.to_string(),
            scenario_path: scenario_path.map(|p| p.display().to_string()),
            results,
            artifacts: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

/// Pretty JSON with a trailing newline. Map keys come from `BTreeMap`s or
/// struct field order, so the output is stable.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report values serialize")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
