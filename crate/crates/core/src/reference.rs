//! The two-function reference scenario with Gaussian objectives.
//!
//! `F1` reads `p1, p2` and owns `o1 = exp(-p1^2 / (2 p2^2))`.
//! `F2` reads `p1, o1` and owns `o2 = exp(-(p1 - 6)^2 * o1^2 / 2)`.
//!
//! The second objective is written in product form. The nested-fraction form
//! `exp(-(p1 - 6)^2 / (2 / o1^2))` is undefined at `o1 = 0` where the limit
//! is 1; the product form is continuous there.

use serde::{Deserialize, Serialize};

use crate::evaluator::{EvalError, EvaluatorSpec, GAUSSIAN_OBJECTIVE_WIDTH, GAUSSIAN_PARAM_WIDTH};
use crate::model::{FunctionSpec, ParameterSpec, Scenario, build_scenario};

pub const P1: &str = "p1";
pub const P2: &str = "p2";
pub const O1: &str = "o1";
pub const O2: &str = "o2";
pub const F1: &str = "F1";
pub const F2: &str = "F2";

/// Center of the second objective's peak in `p1`.
pub const O2_CENTER: f64 = 6.0;

/// `exp(-offset^2 / (2 width^2))`.
pub fn gaussian_param_width(offset: f64, width: f64) -> Result<f64, EvalError> {
    if width == 0.0 {
        return Err(EvalError::ZeroWidth);
    }
    let r = offset / width;
    Ok((-0.5 * r * r).exp())
}

/// `exp(-offset^2 * coupling^2 / 2)`.
pub fn gaussian_objective_width(offset: f64, coupling: f64) -> f64 {
    let r = offset * coupling;
    (-0.5 * r * r).exp()
}

pub fn eval_o1(p1: f64, p2: f64) -> Result<f64, EvalError> {
    gaussian_param_width(p1, p2)
}

pub fn eval_o2(p1: f64, o1: f64) -> Result<f64, EvalError> {
    if !p1.is_finite() {
        return Err(EvalError::NonFiniteInput(0));
    }
    if !o1.is_finite() {
        return Err(EvalError::NonFiniteInput(1));
    }
    Ok(gaussian_objective_width(p1 - O2_CENTER, o1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthMode {
    /// Width is an input: `exp(-(x-c)^2 / (2 w^2))`.
    ParameterSquaredDenominator,
    /// Inverse width is an input: `exp(-(x-c)^2 * k^2 / 2)`.
    ObjectiveCoupled,
}

/// Gaussian objective whose first input is the variable and second input the
/// width-controlling quantity `coupling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: f64,
    pub width_mode: WidthMode,
    pub coupling: String,
}

impl GaussianSpec {
    pub fn evaluator(&self) -> EvaluatorSpec {
        let kind = match self.width_mode {
            WidthMode::ParameterSquaredDenominator => GAUSSIAN_PARAM_WIDTH,
            WidthMode::ObjectiveCoupled => GAUSSIAN_OBJECTIVE_WIDTH,
        };
        let spec = EvaluatorSpec::new(kind);
        if self.center == 0.0 {
            spec
        } else {
            spec.with_arg("center", self.center)
        }
    }

    /// Function reading `[variable, coupling]` and owning `objective`.
    pub fn function(&self, id: &str, variable: &str, objective: &str) -> FunctionSpec {
        FunctionSpec::new(id, [variable, self.coupling.as_str()], objective, self.evaluator())
    }
}

pub fn paper_parameters() -> Vec<ParameterSpec> {
    vec![
        ParameterSpec::new(P1, 4.0, 0.0, 10.0, 1.0),
        ParameterSpec::new(P2, 100.0, 50.0, 300.0, 10.0),
    ]
}

pub fn paper_functions() -> Vec<FunctionSpec> {
    let f1 = GaussianSpec {
        center: 0.0,
        width_mode: WidthMode::ParameterSquaredDenominator,
        coupling: P2.into(),
    };
    let f2 = GaussianSpec {
        center: O2_CENTER,
        width_mode: WidthMode::ObjectiveCoupled,
        coupling: O1.into(),
    };
    vec![f1.function(F1, P1, O1), f2.function(F2, P1, O2)]
}

/// The reference scenario: `p1` in [0, 10] step 1 (default 4), `p2` in
/// [50, 300] step 10 (default 100), both objectives maximized.
pub fn paper_scenario() -> Scenario {
    build_scenario(paper_parameters(), paper_functions())
        .expect("reference scenario is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn o1_examples() {
        assert_eq!(eval_o1(0.0, 100.0).unwrap(), 1.0);
        // exp(-16/20000)
        assert!((eval_o1(4.0, 100.0).unwrap() - 0.999_200_319_914_683_7).abs() < 1e-6);
        assert_eq!(eval_o1(-4.0, 100.0).unwrap(), eval_o1(4.0, 100.0).unwrap());
        assert_eq!(eval_o1(1.0, 0.0), Err(EvalError::ZeroWidth));
    }

    #[test]
    fn o2_examples() {
        assert_eq!(eval_o2(6.0, 0.37).unwrap(), 1.0);
        assert_eq!(eval_o2(6.0, -1e9).unwrap(), 1.0);
        // exp(-4 * 0.9992^2 / 2)
        assert!((eval_o2(4.0, 0.999_200).unwrap() - 0.135_769).abs() < 1e-4);
        assert_eq!(eval_o2(-3.0, 0.0).unwrap(), 1.0);
        assert!(eval_o2(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn paper_scenario_shape() {
        let s = paper_scenario();
        let edges: Vec<(&str, &str)> = s
            .graph()
            .edges()
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        assert_eq!(edges, vec![("o1", "o2"), ("p1", "o1"), ("p1", "o2"), ("p2", "o1")]);
        assert_eq!(s.evaluation_order(), vec![F1, F2]);
        assert_eq!(s.parameter(P1).unwrap(), &ParameterSpec::new(P1, 4.0, 0.0, 10.0, 1.0));
        assert_eq!(s.parameter(P2).unwrap(), &ParameterSpec::new(P2, 100.0, 50.0, 300.0, 10.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2_000))]

        // exponents stay above f64's exp underflow threshold (~ -745)
        #[test]
        fn objectives_stay_in_unit_interval(p1 in -30f64..30.0, p2 in 1f64..1e3, neg in any::<bool>()) {
            let p2 = if neg { -p2 } else { p2 };
            let o1 = eval_o1(p1, p2).unwrap();
            let o2 = eval_o2(p1, o1).unwrap();
            prop_assert!(o1 > 0.0 && o1 <= 1.0, "o1={o1}");
            prop_assert!(o2 > 0.0 && o2 <= 1.0, "o2={o2}");
        }

        #[test]
        fn o1_is_even_in_both_arguments(p1 in -50f64..50.0, p2 in 1f64..500.0) {
            let v = eval_o1(p1, p2).unwrap();
            prop_assert_eq!(v, eval_o1(-p1, p2).unwrap());
            prop_assert_eq!(v, eval_o1(p1, -p2).unwrap());
        }

        #[test]
        fn o1_monotone(p1 in 0.5f64..20.0, p2 in 5f64..50.0, dp in 0.1f64..5.0) {
            prop_assert!(eval_o1(p1, p2 + dp).unwrap() > eval_o1(p1, p2).unwrap());
            prop_assert!(eval_o1(p1 + dp, p2).unwrap() < eval_o1(p1, p2).unwrap());
        }

        #[test]
        fn o2_peaks_at_center(p1 in -20f64..20.0, o1 in 0.05f64..1.0) {
            prop_assume!((p1 - O2_CENTER).abs() > 1e-3);
            prop_assert!(eval_o2(p1, o1).unwrap() < eval_o2(O2_CENTER, o1).unwrap());
        }

        #[test]
        fn product_form_matches_nested_fraction(p1 in 0f64..10.0, o1 in 1e-6f64..1.0) {
            let nested = (-(p1 - 6.0).powi(2) / (2.0 / (o1 * o1))).exp();
            prop_assert!((eval_o2(p1, o1).unwrap() - nested).abs() <= 1e-12);
        }
    }
}
