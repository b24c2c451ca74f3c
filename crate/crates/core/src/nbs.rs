//! Nash-bargaining coordinator.
//!
//! The coordinator picks the configuration maximizing the Nash product
//! `prod_i (u_i - d_i)` over all objectives, where `u_i` is the
//! direction-normalized utility and `d_i` the disagreement payoff. A
//! configuration in which any `u_i <= d_i` scores 0.
//!
//! Three search strategies share the product and the tie-break (smallest
//! value, lexicographic over parameters in declaration order):
//!
//! * [`sequential_nbs`]: one parameter at a time over its grid, freezing each
//!   winner before moving on;
//! * [`coordinate_ascent`]: derivative-free hill climbing by `+/- step`;
//! * [`brute_force_nbs`]: exhaustive search over the full Cartesian grid.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Configuration, Evaluation, ModelError, ParameterSpec, Scenario};

/// Default limit on the number of points [`brute_force_nbs`] will visit.
pub const DEFAULT_GRID_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BargainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("every candidate for `{0}` is at or below the disagreement point")]
    AllBelowDisagreement(String),
    #[error("grid has {size} points, cap is {cap}")]
    GridTooLarge { size: u64, cap: u64 },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{0}` appears more than once in the order")]
    DuplicateParameter(String),
    #[error("unknown objective `{0}` in disagreement point")]
    UnknownObjective(String),
    #[error("invalid candidate set for `{param}`: {reason}")]
    InvalidCandidates { param: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub param: String,
    pub values: Vec<f64>,
}

impl CandidateSet {
    /// Checks the set against `spec`: non-empty, in bounds, strictly
    /// increasing.
    pub fn new(spec: &ParameterSpec, values: Vec<f64>) -> Result<Self, BargainError> {
        let fail = |reason: &str| {
            Err(BargainError::InvalidCandidates {
                param: spec.name.clone(),
                reason: reason.into(),
            })
        };
        if values.is_empty() {
            return fail("empty");
        }
        if values.iter().any(|&v| !v.is_finite() || !spec.contains(v)) {
            return fail("value outside bounds");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return fail("not strictly increasing");
        }
        Ok(Self {
            param: spec.name.clone(),
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Uniform grid `min, min + step, ...` up to `max`; `max` is appended when
/// the step does not land on it.
pub fn candidate_set(spec: &ParameterSpec) -> CandidateSet {
    let range = spec.max - spec.min;
    let mut values = Vec::new();
    if range <= 0.0 {
        values.push(spec.min);
    } else {
        let eps = 1e-9 * range.max(spec.step);
        let n = ((range + eps) / spec.step).floor() as u64;
        values.extend((0..=n).map(|i| spec.min + i as f64 * spec.step));
        let last = values.last_mut().expect("n >= 0");
        if (spec.max - *last).abs() <= eps {
            *last = spec.max;
        } else if *last < spec.max {
            values.push(spec.max);
        }
        values.retain(|&v| v <= spec.max);
    }
    CandidateSet {
        param: spec.name.clone(),
        values,
    }
}

/// Per-objective payoff if bargaining breaks down. Objectives not listed
/// default to 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisagreementPoint {
    values: BTreeMap<String, f64>,
}

impl DisagreementPoint {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with(mut self, objective: impl Into<String>, value: f64) -> Self {
        self.values.insert(objective.into(), value);
        self
    }

    pub fn get(&self, objective: &str) -> f64 {
        self.values.get(objective).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<(), BargainError> {
        for (name, v) in &self.values {
            if scenario.objective(name).is_none() {
                return Err(BargainError::UnknownObjective(name.clone()));
            }
            if !v.is_finite() {
                return Err(BargainError::InvalidArgument(format!(
                    "disagreement for `{name}` must be finite"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub config: Configuration,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainOutcome {
    pub config: Configuration,
    pub nash_product: f64,
    pub per_objective: Evaluation,
    pub trace: Vec<TraceEntry>,
    /// Only meaningful for coordinate ascent; the grid methods always
    /// terminate and report `true`.
    pub converged: bool,
}

fn product_of(scenario: &Scenario, evaluation: &Evaluation, d: &DisagreementPoint) -> f64 {
    let mut product = 1.0;
    for (name, u) in scenario.utilities(evaluation) {
        let gain = u - d.get(&name);
        if gain <= 0.0 {
            return 0.0;
        }
        product *= gain;
    }
    product
}

pub fn nash_product(
    scenario: &Scenario,
    config: &Configuration,
    d: &DisagreementPoint,
) -> Result<f64, BargainError> {
    let evaluation = scenario.evaluate(config)?;
    Ok(product_of(scenario, &evaluation, d))
}

/// Runs evaluations and records them.
struct Tracer<'a> {
    scenario: &'a Scenario,
    d: &'a DisagreementPoint,
    trace: Vec<TraceEntry>,
}

impl<'a> Tracer<'a> {
    fn new(scenario: &'a Scenario, d: &'a DisagreementPoint) -> Self {
        Self {
            scenario,
            d,
            trace: Vec::new(),
        }
    }

    fn product(&mut self, config: Configuration) -> Result<f64, BargainError> {
        let product = nash_product(self.scenario, &config, self.d)?;
        self.trace.push(TraceEntry { config, product });
        Ok(product)
    }

    fn finish(self, config: Configuration, converged: bool) -> Result<BargainOutcome, BargainError> {
        let per_objective = self.scenario.evaluate(&config)?;
        let nash_product = product_of(self.scenario, &per_objective, self.d);
        Ok(BargainOutcome {
            config,
            nash_product,
            per_objective,
            trace: self.trace,
            converged,
        })
    }
}

fn spec_of<'a>(scenario: &'a Scenario, param: &str) -> Result<&'a ParameterSpec, BargainError> {
    scenario
        .parameter(param)
        .ok_or_else(|| BargainError::UnknownParameter(param.to_string()))
}

/// Best candidate for one parameter with everything else fixed at `base`.
/// Ties go to the smallest candidate.
pub fn optimize_parameter(
    scenario: &Scenario,
    cs: &CandidateSet,
    base: &Configuration,
    d: &DisagreementPoint,
) -> Result<(f64, BargainOutcome), BargainError> {
    let mut tracer = Tracer::new(scenario, d);
    let best = search_parameter(&mut tracer, cs, base)?;
    let outcome = tracer.finish(base.with(&cs.param, best), true)?;
    Ok((best, outcome))
}

fn search_parameter(
    tracer: &mut Tracer<'_>,
    cs: &CandidateSet,
    base: &Configuration,
) -> Result<f64, BargainError> {
    let spec = spec_of(tracer.scenario, &cs.param)?;
    let cs = CandidateSet::new(spec, cs.values.clone())?;
    d_check(tracer)?;
    tracer.scenario.validate_configuration(base)?;

    let mut best: Option<(f64, f64)> = None;
    for &value in &cs.values {
        let product = tracer.product(base.with(&cs.param, value))?;
        // candidates are increasing, so strict improvement keeps the smallest
        if best.is_none_or(|(_, p)| product > p) {
            best = Some((value, product));
        }
    }
    match best {
        Some((value, product)) if product > 0.0 => Ok(value),
        _ => Err(BargainError::AllBelowDisagreement(cs.param.clone())),
    }
}

fn d_check(tracer: &Tracer<'_>) -> Result<(), BargainError> {
    tracer.d.validate(tracer.scenario)
}

/// Optimizes the parameters in `order` one after another, starting from the
/// scenario defaults and freezing each winner.
pub fn sequential_nbs(
    scenario: &Scenario,
    order: &[&str],
    d: &DisagreementPoint,
) -> Result<BargainOutcome, BargainError> {
    let mut seen = BTreeSet::new();
    for &p in order {
        spec_of(scenario, p)?;
        if !seen.insert(p) {
            return Err(BargainError::DuplicateParameter(p.to_string()));
        }
    }
    d.validate(scenario)?;

    let mut tracer = Tracer::new(scenario, d);
    let mut working = scenario.default_configuration();
    if order.is_empty() {
        tracer.product(working.clone())?;
    }
    for &p in order {
        let cs = candidate_set(spec_of(scenario, p)?);
        let best = search_parameter(&mut tracer, &cs, &working)?;
        working.set(p, best);
    }
    tracer.finish(working, true)
}

/// Hill climbing on the step lattice: for each parameter in declaration
/// order, move by `+/- step` (clamped to bounds) while the product improves
/// by more than `tol` relative to the current product, so rescaling the
/// objectives does not change where the climb stops. One iteration is one
/// pass over all parameters; a pass without any move means convergence.
pub fn coordinate_ascent(
    scenario: &Scenario,
    start: &Configuration,
    d: &DisagreementPoint,
    max_iters: usize,
    tol: f64,
) -> Result<BargainOutcome, BargainError> {
    if max_iters == 0 {
        return Err(BargainError::InvalidArgument("max_iters must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(BargainError::InvalidArgument("tol must be positive".into()));
    }
    d.validate(scenario)?;
    scenario.validate_configuration(start)?;

    let mut tracer = Tracer::new(scenario, d);
    let mut current = start.clone();
    let mut best = tracer.product(current.clone())?;
    let mut converged = false;

    for _ in 0..max_iters {
        let mut moved = false;
        for spec in scenario.parameters() {
            loop {
                let x = current.get(&spec.name).expect("validated");
                let down = (x - spec.step).max(spec.min);
                let up = (x + spec.step).min(spec.max);
                let mut step_to: Option<(f64, f64)> = None;
                for next in [down, up] {
                    if next == x {
                        continue;
                    }
                    let product = tracer.product(current.with(&spec.name, next))?;
                    if product > best + tol * best.abs() && step_to.is_none_or(|(_, p)| product > p) {
                        step_to = Some((next, product));
                    }
                }
                match step_to {
                    Some((next, product)) => {
                        current.set(spec.name.clone(), next);
                        best = product;
                        moved = true;
                    }
                    None => break,
                }
            }
        }
        if !moved {
            converged = true;
            break;
        }
    }
    tracer.finish(current, converged)
}

/// Exhaustive search over the Cartesian product of every parameter's grid.
pub fn brute_force_nbs(scenario: &Scenario, d: &DisagreementPoint) -> Result<BargainOutcome, BargainError> {
    brute_force_nbs_with_cap(scenario, d, DEFAULT_GRID_CAP)
}

pub fn brute_force_nbs_with_cap(
    scenario: &Scenario,
    d: &DisagreementPoint,
    cap: u64,
) -> Result<BargainOutcome, BargainError> {
    d.validate(scenario)?;
    let grids: Vec<CandidateSet> = scenario.parameters().iter().map(candidate_set).collect();
    let size = grids
        .iter()
        .try_fold(1u64, |acc, g| acc.checked_mul(g.len() as u64))
        .unwrap_or(u64::MAX);
    if size > cap {
        return Err(BargainError::GridTooLarge { size, cap });
    }

    let mut tracer = Tracer::new(scenario, d);
    let mut index = vec![0usize; grids.len()];
    let mut best: Option<(Configuration, f64)> = None;
    loop {
        let config: Configuration = grids
            .iter()
            .zip(&index)
            .map(|(g, &i)| (g.param.clone(), g.values[i]))
            .collect();
        let product = tracer.product(config.clone())?;
        // odometer order is lexicographic, so strict improvement keeps the
        // smallest configuration among ties
        if best.as_ref().is_none_or(|(_, p)| product > *p) {
            best = Some((config, product));
        }
        // advance, last parameter fastest
        let mut k = grids.len();
        loop {
            if k == 0 {
                let (config, product) = best.expect("at least one point");
                if product <= 0.0 {
                    return Err(BargainError::AllBelowDisagreement(
                        grids.iter().map(|g| g.param.as_str()).collect::<Vec<_>>().join(","),
                    ));
                }
                return tracer.finish(config, true);
            }
            k -= 1;
            index[k] += 1;
            if index[k] < grids[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{paper_scenario, P1, P2};

    #[test]
    fn grids() {
        let s = paper_scenario();
        let p1 = candidate_set(s.parameter(P1).unwrap());
        assert_eq!(p1.values, (0..=10).map(f64::from).collect::<Vec<_>>());
        let p2 = candidate_set(s.parameter(P2).unwrap());
        assert_eq!(p2.len(), 26);
        assert_eq!(p2.values[25], 300.0);
        let flat = candidate_set(&ParameterSpec::new("x", 2.0, 2.0, 2.0, 1.0));
        assert_eq!(flat.values, vec![2.0]);
        let ragged = candidate_set(&ParameterSpec::new("x", 0.0, 0.0, 1.0, 0.3));
        assert_eq!(ragged.len(), 5);
        assert_eq!(*ragged.values.last().unwrap(), 1.0);
        let tenths = candidate_set(&ParameterSpec::new("x", 0.0, 0.0, 1.0, 0.1));
        assert_eq!(tenths.len(), 11);
        assert_eq!(*tenths.values.last().unwrap(), 1.0);
    }

    #[test]
    fn candidate_validation() {
        let spec = ParameterSpec::new("x", 0.0, 0.0, 1.0, 0.5);
        assert!(CandidateSet::new(&spec, vec![]).is_err());
        assert!(CandidateSet::new(&spec, vec![0.5, 0.5]).is_err());
        assert!(CandidateSet::new(&spec, vec![0.0, 2.0]).is_err());
        assert!(CandidateSet::new(&spec, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn product_at_disagreement_boundary_is_zero() {
        let s = paper_scenario();
        let cfg = s.default_configuration();
        let ev = s.evaluate(&cfg).unwrap();
        let d = DisagreementPoint::zero().with("o1", ev["o1"]);
        assert_eq!(nash_product(&s, &cfg, &d).unwrap(), 0.0);
        let bad = DisagreementPoint::zero().with("o9", 0.0);
        assert!(matches!(nash_product_checked(&s, &cfg, &bad), Err(BargainError::UnknownObjective(_))));
    }

    fn nash_product_checked(s: &Scenario, c: &Configuration, d: &DisagreementPoint) -> Result<f64, BargainError> {
        d.validate(s)?;
        nash_product(s, c, d)
    }

    #[test]
    fn all_below_disagreement_is_an_error() {
        let s = paper_scenario();
        let d = DisagreementPoint::zero().with("o1", 2.0);
        let cs = candidate_set(s.parameter(P1).unwrap());
        assert!(matches!(
            optimize_parameter(&s, &cs, &s.default_configuration(), &d),
            Err(BargainError::AllBelowDisagreement(_))
        ));
    }

    #[test]
    fn single_candidate_wins_trivially() {
        let s = paper_scenario();
        let cs = CandidateSet::new(s.parameter(P1).unwrap(), vec![3.0]).unwrap();
        let (v, out) = optimize_parameter(&s, &cs, &s.default_configuration(), &DisagreementPoint::zero()).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn order_validation() {
        let s = paper_scenario();
        let d = DisagreementPoint::zero();
        assert_eq!(sequential_nbs(&s, &["p1", "p1"], &d), Err(BargainError::DuplicateParameter("p1".into())));
        assert_eq!(sequential_nbs(&s, &["p9"], &d), Err(BargainError::UnknownParameter("p9".into())));
        let empty = sequential_nbs(&s, &[], &d).unwrap();
        assert_eq!(empty.config, s.default_configuration());
        assert_eq!(empty.trace.len(), 1);
    }

    #[test]
    fn ascent_arguments() {
        let s = paper_scenario();
        let d = DisagreementPoint::zero();
        let start = s.default_configuration();
        assert!(coordinate_ascent(&s, &start, &d, 0, 1e-12).is_err());
        assert!(coordinate_ascent(&s, &start, &d, 5, 0.0).is_err());
        assert!(coordinate_ascent(&s, &start, &d, 5, f64::NAN).is_err());
    }

    #[test]
    fn ascent_climbs_from_tiny_products() {
        // products around 1e-300 must still count as improvements
        let tiny = crate::EvaluatorSpec::new(crate::evaluator::LINEAR)
            .with_arg("bias", 1e-300)
            .with_arg("w0", 1e-300);
        let s = crate::build_scenario(
            vec![ParameterSpec::new("x", 0.0, 0.0, 3.0, 1.0)],
            vec![crate::FunctionSpec::new("F", ["x"], "y", tiny)],
        )
        .unwrap();
        let out = coordinate_ascent(&s, &s.default_configuration(), &DisagreementPoint::zero(), 10, 1e-12).unwrap();
        assert_eq!(out.config.get("x"), Some(3.0));
    }

    #[test]
    fn grid_cap() {
        let s = paper_scenario();
        assert_eq!(
            brute_force_nbs_with_cap(&s, &DisagreementPoint::zero(), 100),
            Err(BargainError::GridTooLarge { size: 286, cap: 100 })
        );
    }
}
