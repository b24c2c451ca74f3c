//! Structural conflict detection between pairs of functions.
//!
//! Categories:
//!
//! * `A1`: two functions read the same input parameter.
//! * `A2`: two functions write the same output parameter.
//! * `B`: one function's objective is an input of another function.
//! * `C1`: two objectives measure the same declared quantity with opposing
//!   directions.
//! * `C2`: a parameter reaches another function's objective only through at
//!   least one intermediate objective. One record per (parameter, objective)
//!   pair, witnessed by a shortest path.
//!
//! Each category has its own detector; [`detect_conflicts`] concatenates and
//! sorts their output.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{FunctionSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConflictCategory {
    A1,
    A2,
    B,
    C1,
    C2,
}

impl ConflictCategory {
    pub const ALL: [ConflictCategory; 5] = [Self::A1, Self::A2, Self::B, Self::C1, Self::C2];
}

impl fmt::Display for ConflictCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub category: ConflictCategory,
    pub functions: (String, String),
    pub subject: String,
    pub path: Vec<String>,
    pub explanation: String,
}

pub fn detect_conflicts(scenario: &Scenario) -> Vec<ConflictRecord> {
    let mut records = Vec::new();
    records.extend(shared_inputs(scenario));
    records.extend(shared_outputs(scenario));
    records.extend(measurement(scenario));
    records.extend(direct_characteristic(scenario));
    records.extend(logical_dependency(scenario));
    records.sort();
    records
}

/// Count per category; categories with no records map to 0.
pub fn conflict_summary(records: &[ConflictRecord]) -> BTreeMap<ConflictCategory, usize> {
    let mut out: BTreeMap<_, _> = ConflictCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for r in records {
        *out.entry(r.category).or_default() += 1;
    }
    out
}

fn pairs(functions: &[FunctionSpec]) -> impl Iterator<Item = (&FunctionSpec, &FunctionSpec)> {
    functions
        .iter()
        .enumerate()
        .flat_map(move |(i, a)| functions[i + 1..].iter().map(move |b| (a, b)))
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn shared_params<'a>(
    scenario: &'a Scenario,
    left: &'a [String],
    right: &'a [String],
) -> impl Iterator<Item = &'a String> + 'a {
    scenario
        .parameters()
        .iter()
        .map(|p| &p.name)
        .filter(move |name| left.contains(name) && right.contains(name))
}

pub fn shared_inputs(scenario: &Scenario) -> Vec<ConflictRecord> {
    let mut out = Vec::new();
    for (a, b) in pairs(scenario.functions()) {
        for param in shared_params(scenario, &a.inputs, &b.inputs) {
            let functions = ordered(&a.id, &b.id);
            out.push(ConflictRecord {
                category: ConflictCategory::A1,
                explanation: format!("{} and {} both read input parameter {param}", functions.0, functions.1),
                functions,
                subject: param.clone(),
                path: Vec::new(),
            });
        }
    }
    out
}

pub fn shared_outputs(scenario: &Scenario) -> Vec<ConflictRecord> {
    let mut out = Vec::new();
    for (a, b) in pairs(scenario.functions()) {
        for param in shared_params(scenario, &a.outputs, &b.outputs) {
            let functions = ordered(&a.id, &b.id);
            out.push(ConflictRecord {
                category: ConflictCategory::A2,
                explanation: format!("{} and {} both write output parameter {param}", functions.0, functions.1),
                functions,
                subject: param.clone(),
                path: Vec::new(),
            });
        }
    }
    out
}

pub fn measurement(scenario: &Scenario) -> Vec<ConflictRecord> {
    let mut out = Vec::new();
    for consumer in scenario.functions() {
        for input in &consumer.inputs {
            let Some(source) = scenario.owner_of(input) else {
                continue;
            };
            out.push(ConflictRecord {
                category: ConflictCategory::B,
                functions: (source.id.clone(), consumer.id.clone()),
                subject: input.clone(),
                path: vec![input.clone(), consumer.objective.clone()],
                explanation: format!(
                    "actions of {} change {input}, which {} measures into {}",
                    source.id, consumer.id, consumer.objective
                ),
            });
        }
    }
    out
}

/// Interpretation: same declared `quantity`, opposite optimization
/// directions. Objectives without a quantity never take part.
pub fn direct_characteristic(scenario: &Scenario) -> Vec<ConflictRecord> {
    let mut out = Vec::new();
    for (a, b) in pairs(scenario.functions()) {
        let (Some(oa), Some(ob)) = (scenario.objective(&a.objective), scenario.objective(&b.objective)) else {
            continue;
        };
        match (&oa.quantity, &ob.quantity) {
            (Some(qa), Some(qb)) if qa == qb && oa.direction != ob.direction => {
                let (first, _) = ordered(&a.id, &b.id);
                let subject = if first == a.id { &a.objective } else { &b.objective };
                out.push(ConflictRecord {
                    category: ConflictCategory::C1,
                    functions: ordered(&a.id, &b.id),
                    subject: subject.clone(),
                    path: Vec::new(),
                    explanation: format!(
                        "{} ({}) and {} ({}) pull quantity {qa} in opposite directions",
                        oa.name, oa.direction.as_str(), ob.name, ob.direction.as_str()
                    ),
                });
            }
            _ => {}
        }
    }
    out
}

pub fn logical_dependency(scenario: &Scenario) -> Vec<ConflictRecord> {
    let graph = scenario.graph();
    let mut out = Vec::new();
    for param in scenario.parameters() {
        let reached = graph.reachable(&param.name);
        for target in scenario.functions() {
            if target.inputs.contains(&param.name) || !reached.contains(&target.objective) {
                continue;
            }
            let Some(path) = graph.shortest_path(&param.name, &target.objective) else {
                continue;
            };
            // path = [param, first intermediate objective, ..., target objective]
            let Some(first) = scenario.owner_of(&path[1]) else {
                continue;
            };
            out.push(ConflictRecord {
                category: ConflictCategory::C2,
                functions: (first.id.clone(), target.id.clone()),
                subject: param.name.clone(),
                path: path.clone(),
                explanation: format!(
                    "changing {} affects {} through {}",
                    param.name,
                    target.objective,
                    path[1..path.len() - 1].join(" -> ")
                ),
            });
        }
    }
    out
}
