//! Problem-spec files: JSON schema, validation, and resolution into core
//! objects.
//!
//! A spec names either a packaged fixture or an equation (builtin or inline
//! expressions), plus probes, a truncation policy, and the functions `f`,
//! `epsilon`, and optionally `delta` in the expression grammar of [`crate::expr`].
//! Field-level diagnostics surface as [`SpecError`] and map to exit code 1.

use std::fmt;
use std::sync::Arc;

use fixcert_core::{
    make_fixture, make_problem, BuiltinProblem, ErrorFn, Evaluator, LinearEquationProblem,
    MetricGroup, TruncationPolicy, FIXTURE_NAMES,
};
use serde::{Deserialize, Serialize};

use crate::expr;

/// Default condition-check horizon N when the spec leaves it out.
pub const DEFAULT_HORIZON: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    /// Packaged fixture name; supplies equation, f, epsilon, and probes,
    /// each overridable by the explicit fields below.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equation: Option<EquationSpec>,
    /// Metric group instance name for inline equations ("additive" or
    /// "multiplicative"); builtins fix their own group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    /// The approximate solution f, as an expression in x.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// The defect bound ε, as an expression in x.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    /// Optional comparison function δ for the separate-δ condition check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    /// Condition-check horizon N.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EquationSpec {
    Builtin {
        builtin: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    Inline { phi: String, a: String },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProbesSpec {
    List(Vec<f64>),
    Grid { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_bound: Option<f64>,
}

/// A spec-file problem: malformed JSON, a failed invariant, or an expression
/// that does not parse. Always maps to exit code 1.
#[derive(Debug, Clone)]
pub struct SpecError {
    pub field: &'static str,
    pub message: String,
}

impl SpecError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        SpecError { field, message: message.into() }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "spec error in field '{}': {}", self.field, self.message)
    }
}

impl std::error::Error for SpecError {}

/// A fully validated spec, resolved into core objects and ready to run.
pub struct ResolvedSpec {
    /// Normalized echo of the input (fixture defaults not expanded; explicit
    /// fields exactly as given).
    pub echo: ProblemSpec,
    pub problem: LinearEquationProblem,
    pub f: Evaluator,
    pub eps: ErrorFn,
    pub delta: Option<ErrorFn>,
    pub probes: Vec<f64>,
    pub policy: TruncationPolicy,
    pub horizon: usize,
}

pub fn parse_spec(text: &str) -> Result<ProblemSpec, SpecError> {
    serde_json::from_str(text).map_err(|e| SpecError::new("(document)", e.to_string()))
}

fn compile_expr(field: &'static str, src: &str) -> Result<Evaluator, SpecError> {
    let e = expr::parse(src).map_err(|pe| SpecError::new(field, pe.to_string()))?;
    Ok(Arc::new(move |x| e.eval(x)))
}

fn expand_probes(spec: &ProbesSpec) -> Result<Vec<f64>, SpecError> {
    let probes = match spec {
        ProbesSpec::List(v) => v.clone(),
        ProbesSpec::Grid { start, stop, step } => {
            if !(*step > 0.0 && step.is_finite()) {
                return Err(SpecError::new("probes.step", "grid step must be > 0"));
            }
            // Half-step slop so `stop` itself survives rounding.
            let count = ((stop - start) / step + 0.5).floor() as i64;
            (0..=count.max(-1)).map(|k| start + step * k as f64).collect()
        }
    };
    if probes.is_empty() {
        return Err(SpecError::new("probes", "probe set must be nonempty"));
    }
    if probes.iter().any(|p| !p.is_finite()) {
        return Err(SpecError::new("probes", "probes must be finite"));
    }
    Ok(probes)
}

fn build_policy(spec: Option<&PolicySpec>) -> Result<TruncationPolicy, SpecError> {
    let mut policy = TruncationPolicy::default();
    if let Some(p) = spec {
        if let Some(v) = p.abs_tol {
            policy.abs_tol = v;
        }
        if let Some(v) = p.max_terms {
            policy.max_terms = v;
        }
        if let Some(v) = p.ratio_window {
            policy.ratio_window = v;
        }
        if let Some(v) = p.ratio_bound {
            policy.ratio_bound = v;
        }
    }
    policy.validate().map_err(|e| SpecError::new("policy", e.to_string()))?;
    Ok(policy)
}

fn build_equation(
    eq: &EquationSpec,
    group: Option<&str>,
) -> Result<LinearEquationProblem, SpecError> {
    match eq {
        EquationSpec::Builtin { builtin, p, c } => {
            let b = match builtin.as_str() {
                "digamma" => BuiltinProblem::Digamma,
                "shift-p" => BuiltinProblem::ShiftP {
                    p: p.ok_or_else(|| {
                        SpecError::new("equation.p", "builtin 'shift-p' requires p")
                    })?,
                },
                "homogeneity" => BuiltinProblem::Homogeneity {
                    c: c.ok_or_else(|| {
                        SpecError::new("equation.c", "builtin 'homogeneity' requires c")
                    })?,
                },
                other => {
                    return Err(SpecError::new(
                        "equation.builtin",
                        format!(
                            "unknown builtin '{other}' (available: digamma, shift-p, homogeneity)"
                        ),
                    ))
                }
            };
            make_problem(b).map_err(|e| SpecError::new("equation", e.to_string()))
        }
        EquationSpec::Inline { phi, a } => {
            let group_name = group.unwrap_or("additive");
            let g = MetricGroup::by_name(group_name).ok_or_else(|| {
                SpecError::new(
                    "group",
                    format!("unknown group '{group_name}' (available: additive, multiplicative)"),
                )
            })?;
            let phi_f = compile_expr("equation.phi", phi)?;
            let a_f = compile_expr("equation.a", a)?;
            Ok(LinearEquationProblem::new(move |x| phi_f(x), move |x| a_f(x), g))
        }
    }
}

/// Validates a parsed spec and resolves it into core objects, applying
/// fixture defaults first and explicit fields on top.
pub fn resolve(spec: &ProblemSpec) -> Result<ResolvedSpec, SpecError> {
    let fixture = match &spec.fixture {
        Some(name) => Some(make_fixture(name).map_err(|_| {
            SpecError::new(
                "fixture",
                format!("unknown fixture '{name}' (available: {})", FIXTURE_NAMES.join(", ")),
            )
        })?),
        None => None,
    };

    let problem = match (&spec.equation, &fixture) {
        (Some(eq), _) => build_equation(eq, spec.group.as_deref())?,
        (None, Some(fx)) => fx.problem.clone(),
        (None, None) => {
            return Err(SpecError::new("equation", "spec needs an equation or a fixture"))
        }
    };

    let f = match (&spec.f, &fixture) {
        (Some(src), _) => compile_expr("f", src)?,
        (None, Some(fx)) => fx.perturbed.clone(),
        (None, None) => return Err(SpecError::new("f", "spec needs f or a fixture")),
    };

    let eps = match (&spec.epsilon, &fixture) {
        (Some(src), _) => compile_expr("epsilon", src)?,
        (None, Some(fx)) => fx.eps.clone(),
        (None, None) => return Err(SpecError::new("epsilon", "spec needs epsilon or a fixture")),
    };

    let delta = match &spec.delta {
        Some(src) => Some(compile_expr("delta", src)?),
        None => None,
    };

    let probes = match (&spec.probes, &fixture) {
        (Some(p), _) => expand_probes(p)?,
        (None, Some(fx)) => fx.probes.clone(),
        (None, None) => return Err(SpecError::new("probes", "spec needs probes or a fixture")),
    };

    let policy = build_policy(spec.policy.as_ref())?;
    let horizon = spec.horizon.unwrap_or(DEFAULT_HORIZON);
    if horizon == 0 {
        return Err(SpecError::new("horizon", "horizon must be at least 1"));
    }

    Ok(ResolvedSpec {
        echo: spec.clone(),
        problem,
        f,
        eps,
        delta,
        probes,
        policy,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_str(text: &str) -> Result<ResolvedSpec, SpecError> {
        resolve(&parse_spec(text)?)
    }

    #[test]
    fn fixture_spec_resolves_with_defaults() {
        let r = resolve_str(r#"{"fixture": "digamma-mild"}"#).unwrap();
        assert_eq!(r.probes.len(), 20);
        assert_eq!(r.horizon, DEFAULT_HORIZON);
        assert!(((r.eps)(1.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn explicit_fields_override_fixture() {
        let r = resolve_str(
            r#"{"fixture": "digamma-mild", "probes": [1.0, 2.0], "horizon": 50,
                "policy": {"abs_tol": 1e-6}}"#,
        )
        .unwrap();
        assert_eq!(r.probes, vec![1.0, 2.0]);
        assert_eq!(r.horizon, 50);
        assert!((r.policy.abs_tol - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn inline_equation_with_grid() {
        let r = resolve_str(
            r#"{"equation": {"phi": "x+1", "a": "1/x"},
                "group": "additive",
                "f": "ln(x)",
                "epsilon": "0.1/x^2",
                "probes": {"start": 0.5, "stop": 10, "step": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(r.probes.len(), 20);
        assert_eq!(r.probes[0], 0.5);
        assert_eq!(*r.probes.last().unwrap(), 10.0);
        assert!(((r.problem.a)(4.0) - 0.25).abs() < 1e-15);
        assert!(((r.problem.phi)(4.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn builtin_equation_with_params() {
        let r = resolve_str(
            r#"{"equation": {"builtin": "shift-p", "p": 2.0},
                "f": "x", "epsilon": "1/x^2", "probes": [1.0]}"#,
        )
        .unwrap();
        assert!(((r.problem.phi)(1.0) - 3.0).abs() < 1e-15);
        assert!(resolve_str(
            r#"{"equation": {"builtin": "shift-p"}, "f": "x", "epsilon": "1", "probes": [1.0]}"#
        )
        .is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        // Empty probe list.
        assert!(resolve_str(r#"{"fixture": "digamma-mild", "probes": []}"#).is_err());
        // Grid with nonpositive step.
        assert!(resolve_str(
            r#"{"fixture": "digamma-mild",
                "probes": {"start": 1, "stop": 2, "step": 0}}"#
        )
        .is_err());
        // Unknown fixture.
        assert!(resolve_str(r#"{"fixture": "nope"}"#).is_err());
        // Bad expression.
        let err = resolve_str(r#"{"fixture": "digamma-mild", "epsilon": "0.1/"}"#)
            .err()
            .expect("bad expression must be rejected");
        assert_eq!(err.field, "epsilon");
        // Unknown top-level field.
        assert!(parse_spec(r#"{"fixture": "digamma-mild", "bogus": 1}"#).is_err());
        // No equation and no fixture.
        assert!(resolve_str(r#"{"f": "x", "epsilon": "1", "probes": [1.0]}"#).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let text = r#"{"fixture": "digamma-mild", "probes": [1.0, 2.0], "horizon": 50}"#;
        let spec = parse_spec(text).unwrap();
        let r = resolve(&spec).unwrap();
        let echoed = serde_json::to_string(&r.echo).unwrap();
        assert_eq!(parse_spec(&echoed).unwrap(), spec);
    }
}
