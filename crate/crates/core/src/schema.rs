//! JSON scenario files.
//!
//! ```json
//! {
//!   "parameters": [
//!     {"name": "p1", "default": 4, "min": 0, "max": 10, "step": 1}
//!   ],
//!   "objectives": [
//!     {"name": "o1", "direction": "maximize", "quantity": "coverage"}
//!   ],
//!   "functions": [
//!     {"id": "F1", "inputs": ["p1", "p2"], "objective": "o1",
//!      "outputs": [],
//!      "evaluator": {"kind": "gaussian_param_width", "args": {"center": 0}}}
//!   ]
//! }
//! ```
//!
//! `objectives` and `outputs` are optional; undeclared objectives are
//! maximized. Unknown fields are rejected. Every error carries a JSON
//! pointer to the offending value.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;
use thiserror::Error;

use crate::evaluator::EvaluatorRegistry;
use crate::model::{FunctionSpec, ModelError, ObjectiveSpec, ParameterSpec, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub parameters: Vec<ParameterSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objectives: Vec<ObjectiveSpec>,
    pub functions: Vec<FunctionSpec>,
}

impl From<&Scenario> for ScenarioDocument {
    fn from(s: &Scenario) -> Self {
        Self {
            parameters: s.parameters().to_vec(),
            objectives: s.objectives().to_vec(),
            functions: s.functions().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    /// JSON pointer (RFC 6901) to the offending value; empty for the root.
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for SchemaError {}

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Schema(#[from] SchemaError),
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

fn pointer_from_path(path: &serde_path_to_error::Path) -> String {
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(format!("/{index}")),
            Segment::Map { key } => Some(format!("/{}", escape(key))),
            Segment::Enum { variant } => Some(format!("/{}", escape(variant))),
            Segment::Unknown => None,
        })
        .collect()
}

pub fn parse_document(text: &str) -> Result<ScenarioDocument, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let pointer = pointer_from_path(err.path());
        let inner = err.into_inner();
        SchemaError {
            pointer,
            message: strip_location(&inner),
        }
    })
}

fn strip_location(err: &serde_json::Error) -> String {
    // serde_json appends " at line X column Y"; keep the location separately
    let msg = err.to_string();
    match msg.rfind(" at line ") {
        Some(i) if err.line() > 0 => format!("{} (line {}, column {})", &msg[..i], err.line(), err.column()),
        _ => msg,
    }
}

/// Locates the JSON pointer a semantic model error refers to.
fn pointer_for(doc: &ScenarioDocument, err: &ModelError) -> String {
    let param_idx = |name: &str| doc.parameters.iter().position(|p| p.name == name);
    let func_idx = |id: &str| doc.functions.iter().position(|f| f.id == id);
    match err {
        ModelError::NoFunctions => "/functions".into(),
        ModelError::InvalidParameter { name, .. } => param_idx(name)
            .map(|i| format!("/parameters/{i}"))
            .unwrap_or_else(|| "/parameters".into()),
        ModelError::DuplicateName(name) => {
            if let Some(i) = doc.parameters.iter().rposition(|p| &p.name == name) {
                format!("/parameters/{i}/name")
            } else if let Some(i) = doc.functions.iter().rposition(|f| &f.id == name) {
                format!("/functions/{i}/id")
            } else if let Some(i) = doc.objectives.iter().rposition(|o| &o.name == name) {
                format!("/objectives/{i}/name")
            } else if let Some(i) = doc.functions.iter().position(|f| &f.objective == name) {
                format!("/functions/{i}/objective")
            } else {
                String::new()
            }
        }
        ModelError::UnknownInput { function, input } => match func_idx(function) {
            Some(i) => match doc.functions[i].inputs.iter().position(|x| x == input) {
                Some(j) => format!("/functions/{i}/inputs/{j}"),
                None => format!("/functions/{i}/inputs"),
            },
            None => "/functions".into(),
        },
        ModelError::UnknownOutput { function, output } => match func_idx(function) {
            Some(i) => match doc.functions[i].outputs.iter().position(|x| x == output) {
                Some(j) => format!("/functions/{i}/outputs/{j}"),
                None => format!("/functions/{i}/outputs"),
            },
            None => "/functions".into(),
        },
        ModelError::DuplicateObjectiveOwner(o) => doc
            .functions
            .iter()
            .rposition(|f| &f.objective == o)
            .map(|i| format!("/functions/{i}/objective"))
            .unwrap_or_else(|| "/functions".into()),
        ModelError::UnownedObjective(o) => doc
            .objectives
            .iter()
            .position(|x| &x.name == o)
            .map(|i| format!("/objectives/{i}/name"))
            .unwrap_or_else(|| "/objectives".into()),
        ModelError::CyclicDependency(_) => "/functions".into(),
        ModelError::Evaluator { function, .. } => func_idx(function)
            .map(|i| format!("/functions/{i}/evaluator"))
            .unwrap_or_else(|| "/functions".into()),
        ModelError::UnknownParameter(_)
        | ModelError::InvalidConfiguration(_)
        | ModelError::EvaluatorFailure { .. } => String::new(),
    }
}

impl ScenarioDocument {
    pub fn build(&self, registry: &EvaluatorRegistry) -> Result<Scenario, SchemaError> {
        Scenario::build(
            self.parameters.clone(),
            self.objectives.clone(),
            self.functions.clone(),
            registry,
        )
        .map_err(|err| SchemaError {
            pointer: pointer_for(self, &err),
            message: err.to_string(),
        })
    }
}

pub fn scenario_from_str(text: &str) -> Result<Scenario, SchemaError> {
    parse_document(text)?.build(&EvaluatorRegistry::with_builtins())
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(scenario_from_str(&text)?)
}

pub fn scenario_to_json(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioDocument::from(scenario)).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::paper_scenario;

    fn err(text: &str) -> SchemaError {
        scenario_from_str(text).unwrap_err()
    }

    #[test]
    fn round_trip_preserves_the_reference_scenario() {
        let s = paper_scenario();
        let back = scenario_from_str(&scenario_to_json(&s)).unwrap();
        assert_eq!(back.parameters(), s.parameters());
        assert_eq!(back.functions(), s.functions());
        assert_eq!(back.graph(), s.graph());
    }

    #[test]
    fn type_errors_point_at_the_field() {
        let e = err(r#"{"parameters":[{"name":"a","default":0,"min":"x","max":1,"step":1}],"functions":[]}"#);
        assert_eq!(e.pointer, "/parameters/0/min");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let e = err(r#"{"parameters":[],"functions":[],"extra":1}"#);
        assert!(e.message.contains("unknown field"), "{e}");
    }

    #[test]
    fn semantic_errors_point_at_the_value() {
        assert_eq!(err(r#"{"parameters":[],"functions":[]}"#).pointer, "/functions");
        let e = err(
            r#"{"parameters":[{"name":"a","default":0,"min":0,"max":1,"step":1}],
                "functions":[{"id":"F","inputs":["a","zz"],"objective":"o","evaluator":{"kind":"linear"}}]}"#,
        );
        assert_eq!(e.pointer, "/functions/0/inputs/1");
        let e = err(
            r#"{"parameters":[{"name":"a","default":5,"min":0,"max":1,"step":1}],
                "functions":[{"id":"F","inputs":["a"],"objective":"o","evaluator":{"kind":"linear"}}]}"#,
        );
        assert_eq!(e.pointer, "/parameters/0");
        let e = err(
            r#"{"parameters":[{"name":"a","default":0,"min":0,"max":1,"step":1}],
                "functions":[{"id":"F","inputs":["a"],"objective":"o","evaluator":{"kind":"nope"}}]}"#,
        );
        assert_eq!(e.pointer, "/functions/0/evaluator");
    }

    #[test]
    fn syntax_errors_report_root() {
        let e = err("{not json");
        assert!(e.pointer.is_empty());
        assert!(e.to_string().starts_with("/: "));
    }
}
