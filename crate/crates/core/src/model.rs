//! Parameters, cognitive functions and the composed scenario.
//!
//! A [`Scenario`] is validated once at construction: names are unique, every
//! function input resolves, each objective has exactly one owner and the
//! objective dependencies are acyclic. The resulting topological order is
//! fixed, so [`Scenario::evaluate`] is a straight pass over the functions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluator::{CompileError, EvalError, EvaluatorRegistry, EvaluatorSpec, SharedEvaluator};
use crate::graph::DependencyGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("scenario has no functions")]
    NoFunctions,
    #[error("name `{0}` is declared more than once")]
    DuplicateName(String),
    #[error("parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("function `{function}`: input `{input}` resolves to no parameter or objective")]
    UnknownInput { function: String, input: String },
    #[error("function `{function}`: output `{output}` is not a declared parameter")]
    UnknownOutput { function: String, output: String },
    #[error("objective `{0}` is owned by more than one function")]
    DuplicateObjectiveOwner(String),
    #[error("objective `{0}` is declared but no function owns it")]
    UnownedObjective(String),
    #[error("cyclic dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("function `{function}`: {source}")]
    Evaluator {
        function: String,
        #[source]
        source: CompileError,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("function `{function}` failed: {source}")]
    EvaluatorFailure {
        function: String,
        #[source]
        source: EvalError,
    },
}

/// A tunable network parameter with bounds and a grid step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>, default: f64, min: f64, max: f64, step: f64) -> Self {
        Self {
            name: name.into(),
            default,
            min,
            max,
            step,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InvalidParameter {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.name.is_empty() {
            return fail("empty name");
        }
        if ![self.default, self.min, self.max, self.step]
            .iter()
            .all(|v| v.is_finite())
        {
            return fail("all fields must be finite");
        }
        if self.min > self.max {
            return fail("min exceeds max");
        }
        if self.default < self.min || self.default > self.max {
            return fail("default outside [min, max]");
        }
        if self.step <= 0.0 {
            return fail("step must be positive");
        }
        if self.max > self.min && self.step > self.max - self.min {
            return fail("step exceeds the range");
        }
        Ok(())
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min && value <= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Maximize,
    Minimize,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Maximize => "maximize",
            Direction::Minimize => "minimize",
        }
    }

    /// Maps a raw objective value onto a "larger is better" utility.
    pub fn utility(self, value: f64) -> f64 {
        match self {
            Direction::Maximize => value,
            Direction::Minimize => -value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub name: String,
    #[serde(default)]
    pub direction: Direction,
    /// Underlying quantity this objective measures. Two objectives over the
    /// same quantity with opposing directions are in direct conflict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
}

impl ObjectiveSpec {
    pub fn maximize(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            direction: Direction::Maximize,
            quantity: None,
        }
    }
}

/// A cognitive function: reads `inputs`, owns `objective`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: String,
    pub inputs: Vec<String>,
    pub objective: String,
    /// Parameters this function writes to (actuation targets).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    pub evaluator: EvaluatorSpec,
}

impl FunctionSpec {
    pub fn new<I, S>(id: impl Into<String>, inputs: I, objective: impl Into<String>, evaluator: EvaluatorSpec) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            inputs: inputs.into_iter().map(Into::into).collect(),
            objective: objective.into(),
            outputs: Vec::new(),
            evaluator,
        }
    }

    pub fn with_outputs<I, S>(mut self, outputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.outputs = outputs.into_iter().map(Into::into).collect();
        self
    }
}

/// Assignment of a value to every parameter of a scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    values: BTreeMap<String, f64>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    /// Copy of `self` with one value replaced.
    pub fn with(&self, name: &str, value: f64) -> Self {
        let mut out = self.clone();
        out.set(name, value);
        out
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (S, f64)>>(iter: T) -> Self {
        Self {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Objective name to raw objective value.
pub type Evaluation = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub objectives: Evaluation,
}

/// The composed multi-function system.
#[derive(Clone)]
pub struct Scenario {
    parameters: Vec<ParameterSpec>,
    objectives: Vec<ObjectiveSpec>,
    functions: Vec<FunctionSpec>,
    evaluators: Vec<SharedEvaluator>,
    order: Vec<usize>,
    graph: DependencyGraph,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("parameters", &self.parameters)
            .field("objectives", &self.objectives)
            .field("functions", &self.functions)
            .field("order", &self.order)
            .finish()
    }
}

/// Builds a scenario with the built-in evaluators; every objective is
/// maximized.
pub fn build_scenario(
    params: Vec<ParameterSpec>,
    functions: Vec<FunctionSpec>,
) -> Result<Scenario, ModelError> {
    Scenario::build(params, Vec::new(), functions, &EvaluatorRegistry::with_builtins())
}

impl Scenario {
    /// Validates and composes a scenario. Objectives owned by a function but
    /// missing from `objectives` are added with direction `maximize`.
    pub fn build(
        parameters: Vec<ParameterSpec>,
        objectives: Vec<ObjectiveSpec>,
        functions: Vec<FunctionSpec>,
        registry: &EvaluatorRegistry,
    ) -> Result<Self, ModelError> {
        if functions.is_empty() {
            return Err(ModelError::NoFunctions);
        }
        let mut names = BTreeSet::new();
        for p in &parameters {
            p.validate()?;
            if !names.insert(p.name.as_str()) {
                return Err(ModelError::DuplicateName(p.name.clone()));
            }
        }
        let mut function_ids = BTreeSet::new();
        for f in &functions {
            if !function_ids.insert(f.id.as_str()) {
                return Err(ModelError::DuplicateName(f.id.clone()));
            }
        }

        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, f) in functions.iter().enumerate() {
            if owner.insert(f.objective.as_str(), i).is_some() {
                return Err(ModelError::DuplicateObjectiveOwner(f.objective.clone()));
            }
            if names.contains(f.objective.as_str()) {
                return Err(ModelError::DuplicateName(f.objective.clone()));
            }
        }

        let mut declared = BTreeSet::new();
        for o in &objectives {
            if !declared.insert(o.name.as_str()) {
                return Err(ModelError::DuplicateName(o.name.clone()));
            }
            if !owner.contains_key(o.name.as_str()) {
                return Err(ModelError::UnownedObjective(o.name.clone()));
            }
        }
        let mut all_objectives = objectives.clone();
        for f in &functions {
            if !declared.contains(f.objective.as_str()) {
                all_objectives.push(ObjectiveSpec::maximize(f.objective.clone()));
            }
        }

        let param_names: BTreeSet<&str> = parameters.iter().map(|p| p.name.as_str()).collect();
        let mut edges = Vec::new();
        for f in &functions {
            for input in &f.inputs {
                if !param_names.contains(input.as_str()) && !owner.contains_key(input.as_str()) {
                    return Err(ModelError::UnknownInput {
                        function: f.id.clone(),
                        input: input.clone(),
                    });
                }
                edges.push((input.clone(), f.objective.clone()));
            }
            for out in &f.outputs {
                if !param_names.contains(out.as_str()) {
                    return Err(ModelError::UnknownOutput {
                        function: f.id.clone(),
                        output: out.clone(),
                    });
                }
            }
        }

        let order = topological_order(&functions, &owner)?;

        let evaluators = functions
            .iter()
            .map(|f| {
                registry
                    .compile(&f.evaluator, f.inputs.len())
                    .map_err(|source| ModelError::Evaluator {
                        function: f.id.clone(),
                        source,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let nodes = parameters
            .iter()
            .map(|p| p.name.clone())
            .chain(all_objectives.iter().map(|o| o.name.clone()));
        let graph = DependencyGraph::new(nodes, edges);

        Ok(Self {
            parameters,
            objectives: all_objectives,
            functions,
            evaluators,
            order,
            graph,
        })
    }

    pub fn parameters(&self) -> &[ParameterSpec] {
        &self.parameters
    }

    pub fn objectives(&self) -> &[ObjectiveSpec] {
        &self.objectives
    }

    pub fn functions(&self) -> &[FunctionSpec] {
        &self.functions
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    /// Function ids in evaluation order.
    pub fn evaluation_order(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.functions[i].id.as_str()).collect()
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn objective(&self, name: &str) -> Option<&ObjectiveSpec> {
        self.objectives.iter().find(|o| o.name == name)
    }

    pub fn function(&self, id: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.id == id)
    }

    pub fn is_parameter(&self, name: &str) -> bool {
        self.parameter(name).is_some()
    }

    pub fn owner_of(&self, objective: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.objective == objective)
    }

    pub fn default_configuration(&self) -> Configuration {
        self.parameters
            .iter()
            .map(|p| (p.name.clone(), p.default))
            .collect()
    }

    pub fn validate_configuration(&self, config: &Configuration) -> Result<(), ModelError> {
        for name in config.values().keys() {
            if !self.is_parameter(name) {
                return Err(ModelError::InvalidConfiguration(format!(
                    "unknown parameter `{name}`"
                )));
            }
        }
        for p in &self.parameters {
            let v = config.get(&p.name).ok_or_else(|| {
                ModelError::InvalidConfiguration(format!("missing value for `{}`", p.name))
            })?;
            if !v.is_finite() || !p.contains(v) {
                return Err(ModelError::InvalidConfiguration(format!(
                    "`{}` = {v} outside [{}, {}]",
                    p.name, p.min, p.max
                )));
            }
        }
        Ok(())
    }

    /// Computes every objective for `config`, in dependency order.
    pub fn evaluate(&self, config: &Configuration) -> Result<Evaluation, ModelError> {
        self.validate_configuration(config)?;
        let mut values: HashMap<&str, f64> = config
            .values()
            .iter()
            .map(|(k, v)| (k.as_str(), *v))
            .collect();
        let mut out = Evaluation::new();
        let mut inputs = Vec::new();
        for &i in &self.order {
            let f = &self.functions[i];
            inputs.clear();
            inputs.extend(f.inputs.iter().map(|name| values[name.as_str()]));
            let fail = |source| ModelError::EvaluatorFailure {
                function: f.id.clone(),
                source,
            };
            let v = self.evaluators[i].evaluate(&inputs).map_err(fail)?;
            if !v.is_finite() {
                return Err(fail(EvalError::NonFiniteOutput(v)));
            }
            values.insert(f.objective.as_str(), v);
            out.insert(f.objective.clone(), v);
        }
        Ok(out)
    }

    /// Direction-normalized utility of each objective ("larger is better").
    pub fn utilities(&self, evaluation: &Evaluation) -> BTreeMap<String, f64> {
        self.objectives
            .iter()
            .filter_map(|o| {
                evaluation
                    .get(&o.name)
                    .map(|&v| (o.name.clone(), o.direction.utility(v)))
            })
            .collect()
    }

    /// Evaluates the scenario once per value of `param`, other parameters
    /// taken from `base`. Rows follow the order of `values`.
    pub fn sweep(
        &self,
        param: &str,
        values: &[f64],
        base: &Configuration,
    ) -> Result<Vec<SweepRow>, ModelError> {
        if !self.is_parameter(param) {
            return Err(ModelError::UnknownParameter(param.to_string()));
        }
        self.validate_configuration(base)?;
        values
            .iter()
            .map(|&value| {
                let objectives = self.evaluate(&base.with(param, value))?;
                Ok(SweepRow { value, objectives })
            })
            .collect()
    }
}

fn topological_order(
    functions: &[FunctionSpec],
    owner: &BTreeMap<&str, usize>,
) -> Result<Vec<usize>, ModelError> {
    // deps[i]: functions whose objectives feed function i
    let deps: Vec<BTreeSet<usize>> = functions
        .iter()
        .map(|f| {
            f.inputs
                .iter()
                .filter_map(|input| owner.get(input.as_str()).copied())
                .collect()
        })
        .collect();

    let mut done = vec![false; functions.len()];
    let mut order = Vec::with_capacity(functions.len());
    // Repeatedly take the first ready function in declaration order.
    while order.len() < functions.len() {
        let ready = (0..functions.len())
            .find(|&i| !done[i] && deps[i].iter().all(|&d| done[d] && d != i));
        match ready {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let start = (0..functions.len()).find(|&i| !done[i]).unwrap_or(0);
                return Err(ModelError::CyclicDependency(find_cycle(
                    start, functions, &deps, &done,
                )));
            }
        }
    }
    Ok(order)
}

fn find_cycle(
    start: usize,
    functions: &[FunctionSpec],
    deps: &[BTreeSet<usize>],
    done: &[bool],
) -> Vec<String> {
    // Every remaining function has an unfinished dependency, so walking
    // backwards along dependencies must revisit a node.
    let mut walk = vec![start];
    let mut cur = start;
    loop {
        let next = deps[cur].iter().copied().find(|&d| !done[d]).unwrap_or(cur);
        if let Some(pos) = walk.iter().position(|&w| w == next) {
            let mut cycle: Vec<String> = walk[pos..]
                .iter()
                .rev()
                .map(|&i| functions[i].objective.clone())
                .collect();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        walk.push(next);
        cur = next;
    }
}
