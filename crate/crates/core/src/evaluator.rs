//! Named, pure objective evaluators.
//!
//! A [`FunctionSpec`](crate::model::FunctionSpec) refers to its evaluator by
//! `kind` plus a flat map of numeric `args`, which keeps scenarios
//! serializable. An [`EvaluatorRegistry`] turns that description into a
//! callable [`Evaluator`] at build time. The built-in kinds are:
//!
//! | kind                       | inputs           | output                                   |
//! |----------------------------|------------------|------------------------------------------|
//! | `gaussian_param_width`     | `[x, width]`     | `scale * exp(-(x-center)^2 / (2 width^2))` |
//! | `gaussian_objective_width` | `[x, coupling]`  | `scale * exp(-(x-center)^2 * coupling^2 / 2)` |
//! | `linear`                   | any              | `bias + sum(w<i> * input_i)`             |
//! | `constant`                 | any (ignored)    | `value`                                  |
//!
//! Additional kinds can be registered with [`EvaluatorRegistry::register`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reference;

/// Serializable description of an evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorSpec {
    pub kind: String,
    #[serde(default)]
    pub args: BTreeMap<String, f64>,
}

impl EvaluatorSpec {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            args: BTreeMap::new(),
        }
    }

    pub fn with_arg(mut self, name: impl Into<String>, value: f64) -> Self {
        self.args.insert(name.into(), value);
        self
    }

    fn arg_or(&self, name: &str, default: f64) -> f64 {
        self.args.get(name).copied().unwrap_or(default)
    }
}

/// Failure raised while evaluating a single function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("zero width")]
    ZeroWidth,
    #[error("non-finite input at position {0}")]
    NonFiniteInput(usize),
    #[error("evaluator produced a non-finite value ({0})")]
    NonFiniteOutput(f64),
    #[error("{0}")]
    Custom(String),
}

/// Failure raised while compiling an [`EvaluatorSpec`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("unknown evaluator kind `{0}`")]
    UnknownKind(String),
    #[error("evaluator `{kind}` expects {expected} inputs, got {got}")]
    Arity {
        kind: String,
        expected: usize,
        got: usize,
    },
    #[error("evaluator `{kind}`: invalid argument `{arg}`: {reason}")]
    InvalidArg {
        kind: String,
        arg: String,
        reason: String,
    },
}

/// A pure mapping from ordered input values to one objective value.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, inputs: &[f64]) -> Result<f64, EvalError>;
}

impl<F> Evaluator for F
where
    F: Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync,
{
    fn evaluate(&self, inputs: &[f64]) -> Result<f64, EvalError> {
        self(inputs)
    }
}

pub type SharedEvaluator = Arc<dyn Evaluator>;

/// Builds an evaluator from its spec and the number of inputs it will receive.
pub type EvaluatorFactory =
    Arc<dyn Fn(&EvaluatorSpec, usize) -> Result<SharedEvaluator, CompileError> + Send + Sync>;

#[derive(Clone)]
pub struct EvaluatorRegistry {
    factories: BTreeMap<String, EvaluatorFactory>,
}

impl fmt::Debug for EvaluatorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluatorRegistry")
            .field("kinds", &self.factories.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for EvaluatorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

pub const GAUSSIAN_PARAM_WIDTH: &str = "gaussian_param_width";
pub const GAUSSIAN_OBJECTIVE_WIDTH: &str = "gaussian_objective_width";
pub const LINEAR: &str = "linear";
pub const CONSTANT: &str = "constant";

impl EvaluatorRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(GAUSSIAN_PARAM_WIDTH, |spec, arity| {
            expect_arity(spec, arity, 2)?;
            let center = finite_arg(spec, "center", 0.0)?;
            let scale = scale_arg(spec)?;
            Ok(Arc::new(move |x: &[f64]| {
                check_inputs(x)?;
                Ok(scale * reference::gaussian_param_width(x[0] - center, x[1])?)
            }) as SharedEvaluator)
        });
        reg.register(GAUSSIAN_OBJECTIVE_WIDTH, |spec, arity| {
            expect_arity(spec, arity, 2)?;
            let center = finite_arg(spec, "center", 0.0)?;
            let scale = scale_arg(spec)?;
            Ok(Arc::new(move |x: &[f64]| {
                check_inputs(x)?;
                Ok(scale * reference::gaussian_objective_width(x[0] - center, x[1]))
            }) as SharedEvaluator)
        });
        reg.register(LINEAR, |spec, arity| {
            let bias = finite_arg(spec, "bias", 0.0)?;
            let weights = (0..arity)
                .map(|i| finite_arg(spec, &format!("w{i}"), 1.0))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Arc::new(move |x: &[f64]| {
                check_inputs(x)?;
                Ok(bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            }) as SharedEvaluator)
        });
        reg.register(CONSTANT, |spec, _| {
            let value = finite_arg(spec, "value", 0.0)?;
            Ok(Arc::new(move |_: &[f64]| Ok(value)) as SharedEvaluator)
        });
        reg
    }

    /// Registers (or replaces) the factory for `kind`.
    pub fn register<F>(&mut self, kind: impl Into<String>, factory: F) -> &mut Self
    where
        F: Fn(&EvaluatorSpec, usize) -> Result<SharedEvaluator, CompileError>
            + Send
            + Sync
            + 'static,
    {
        self.factories.insert(kind.into(), Arc::new(factory));
        self
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn compile(
        &self,
        spec: &EvaluatorSpec,
        arity: usize,
    ) -> Result<SharedEvaluator, CompileError> {
        let factory = self
            .factories
            .get(&spec.kind)
            .ok_or_else(|| CompileError::UnknownKind(spec.kind.clone()))?;
        factory(spec, arity)
    }
}

fn expect_arity(spec: &EvaluatorSpec, got: usize, expected: usize) -> Result<(), CompileError> {
    if got == expected {
        Ok(())
    } else {
        Err(CompileError::Arity {
            kind: spec.kind.clone(),
            expected,
            got,
        })
    }
}

fn finite_arg(spec: &EvaluatorSpec, name: &str, default: f64) -> Result<f64, CompileError> {
    let v = spec.arg_or(name, default);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CompileError::InvalidArg {
            kind: spec.kind.clone(),
            arg: name.to_string(),
            reason: "must be finite".into(),
        })
    }
}

fn scale_arg(spec: &EvaluatorSpec) -> Result<f64, CompileError> {
    let v = finite_arg(spec, "scale", 1.0)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CompileError::InvalidArg {
            kind: spec.kind.clone(),
            arg: "scale".into(),
            reason: "must be positive".into(),
        })
    }
}

fn check_inputs(x: &[f64]) -> Result<(), EvalError> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(EvalError::NonFiniteInput(i)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_kind_is_rejected() {
        let reg = EvaluatorRegistry::with_builtins();
        let err = reg.compile(&EvaluatorSpec::new("polynomial"), 1).err();
        assert_eq!(err, Some(CompileError::UnknownKind("polynomial".into())));
    }

    #[test]
    fn gaussian_kinds_require_two_inputs() {
        let reg = EvaluatorRegistry::with_builtins();
        for kind in [GAUSSIAN_PARAM_WIDTH, GAUSSIAN_OBJECTIVE_WIDTH] {
            assert!(matches!(
                reg.compile(&EvaluatorSpec::new(kind), 3),
                Err(CompileError::Arity { expected: 2, got: 3, .. })
            ));
        }
    }

    #[test]
    fn linear_uses_indexed_weights() {
        let reg = EvaluatorRegistry::with_builtins();
        let spec = EvaluatorSpec::new(LINEAR)
            .with_arg("bias", 1.0)
            .with_arg("w1", -2.0);
        let ev = reg.compile(&spec, 2).unwrap();
        assert_eq!(ev.evaluate(&[3.0, 4.0]).unwrap(), 1.0 + 3.0 - 8.0);
    }

    #[test]
    fn scale_multiplies_output() {
        let reg = EvaluatorRegistry::with_builtins();
        let spec = EvaluatorSpec::new(GAUSSIAN_PARAM_WIDTH).with_arg("scale", 2.5);
        let ev = reg.compile(&spec, 2).unwrap();
        assert_eq!(ev.evaluate(&[0.0, 100.0]).unwrap(), 2.5);
        let bad = EvaluatorSpec::new(GAUSSIAN_PARAM_WIDTH).with_arg("scale", 0.0);
        assert!(reg.compile(&bad, 2).is_err());
    }

    #[test]
    fn zero_width_surfaces_as_eval_error() {
        let reg = EvaluatorRegistry::with_builtins();
        let ev = reg.compile(&EvaluatorSpec::new(GAUSSIAN_PARAM_WIDTH), 2).unwrap();
        assert_eq!(ev.evaluate(&[1.0, 0.0]), Err(EvalError::ZeroWidth));
        assert_eq!(
            ev.evaluate(&[f64::NAN, 1.0]),
            Err(EvalError::NonFiniteInput(0))
        );
    }

    #[test]
    fn custom_kind_can_be_registered() {
        let mut reg = EvaluatorRegistry::empty();
        reg.register("square", |_, _| {
            Ok(Arc::new(|x: &[f64]| Ok(x[0] * x[0])) as SharedEvaluator)
        });
        let ev = reg.compile(&EvaluatorSpec::new("square"), 1).unwrap();
        assert_eq!(ev.evaluate(&[3.0]).unwrap(), 9.0);
        assert_eq!(reg.kinds().collect::<Vec<_>>(), vec!["square"]);
    }
}
