//! Built-in problem instances and their independent reference solutions.
//!
//! The digamma function ψ solves g(x+1) = g(x) + 1/x on (0, ∞) and is the
//! primary ground truth here; `reference_digamma` is computed by recurrence
//! plus asymptotic expansion, independently of every solver path it checks.
//! The p-shift equation g(x+p) = g(x) + 1/x is solved by (1/p)·ψ(x/p), and
//! the multiplicative homogeneity equation g(2x) = c·g(x) by x^(log₂ c);
//! the latter exists to exercise the non-additive log-ratio metric.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::MetricGroup;
use crate::linear::LinearEquationProblem;
use crate::space::{ErrorFn, Evaluator};

/// A named problem instance with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinProblem {
    /// g(x+1) = g(x) + 1/x over the additive reals.
    Digamma,
    /// g(x+p) = g(x) + 1/x over the additive reals, p > 0.
    ShiftP { p: f64 },
    /// g(2x) = c·g(x) over the positive reals under multiplication, c > 0.
    Homogeneity { c: f64 },
}

impl BuiltinProblem {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinProblem::Digamma => "digamma",
            BuiltinProblem::ShiftP { .. } => "shift-p",
            BuiltinProblem::Homogeneity { .. } => "homogeneity",
        }
    }
}

/// Instantiates a built-in equation as a solvable problem.
pub fn make_problem(b: BuiltinProblem) -> Result<LinearEquationProblem> {
    match b {
        BuiltinProblem::Digamma => Ok(LinearEquationProblem::new(
            |x| x + 1.0,
            |x| 1.0 / x,
            MetricGroup::AdditiveReals,
        )),
        BuiltinProblem::ShiftP { p } => {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidParams { detail: "shift p must be a positive real" });
            }
            Ok(LinearEquationProblem::new(
                move |x| x + p,
                |x| 1.0 / x,
                MetricGroup::AdditiveReals,
            ))
        }
        BuiltinProblem::Homogeneity { c } => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParams { detail: "homogeneity ratio c must be > 0" });
            }
            Ok(LinearEquationProblem::new(
                |x| 2.0 * x,
                move |_| c,
                MetricGroup::MultiplicativePositiveReals,
            ))
        }
    }
}

/// Shift the argument above this value before applying the asymptotic
/// expansion; with four correction terms the truncation error stays near
/// 1e-13, an order of magnitude below any tolerance checked against it.
const ASYMPTOTIC_THRESHOLD: f64 = 16.0;

/// The digamma function ψ(x) for x > 0.
///
/// Applies the defining recurrence ψ(x) = ψ(x+1) − 1/x until the argument
/// exceeds the asymptotic threshold, then
/// ψ(t) ≈ ln t − 1/(2t) − 1/(12t²) + 1/(120t⁴) − 1/(252t⁶).
pub fn reference_digamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::DomainViolation {
            value: x,
            orbit_index: None,
            context: "digamma is defined here only for x > 0",
        });
    }
    let mut shift = 0.0;
    let mut t = x;
    while t <= ASYMPTOTIC_THRESHOLD {
        shift -= 1.0 / t;
        t += 1.0;
    }
    let u = 1.0 / (t * t);
    let series = u * (1.0 / 12.0 - u * (1.0 / 120.0 - u * (1.0 / 252.0)));
    Ok(shift + libm::log(t) - 0.5 / t - series)
}

/// The canonical solution (1/p)·ψ(x/p) of g(x+p) = g(x) + 1/x.
pub fn reference_shift_p_solution(x: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::DomainViolation {
            value: p,
            orbit_index: None,
            context: "shift p must be a positive real",
        });
    }
    Ok(reference_digamma(x / p)? / p)
}

/// An exact solution, a perturbation of it, and the claimed defect bound —
/// the standing test corpus for the solvers and the certifier.
pub struct PerturbationFixture {
    pub name: &'static str,
    pub builtin: BuiltinProblem,
    pub problem: LinearEquationProblem,
    /// Exact solution of the equation.
    pub base: Evaluator,
    /// base perturbed; the solvers receive this as f.
    pub perturbed: Evaluator,
    /// Claimed pointwise defect bound ε.
    pub eps: ErrorFn,
    pub probes: Vec<f64>,
}

pub const FIXTURE_NAMES: &[&str] =
    &["digamma-mild", "digamma-violating", "shift2-mild", "homog-mild"];

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = start;
    while x <= stop + 1e-9 {
        v.push(x);
        x += step;
    }
    v
}

/// Builds a named fixture. `digamma-violating` is the negative control: its
/// perturbation 0.2·sin(x) does not vanish along the orbit and its residual
/// exceeds the claimed ε at some probes.
pub fn make_fixture(name: &str) -> Result<PerturbationFixture> {
    match name {
        "digamma-mild" => Ok(PerturbationFixture {
            name: "digamma-mild",
            builtin: BuiltinProblem::Digamma,
            problem: make_problem(BuiltinProblem::Digamma)?,
            base: Arc::new(|x| reference_digamma(x).unwrap_or(f64::NAN)),
            perturbed: Arc::new(|x| {
                reference_digamma(x).map(|v| v + 0.05 / (x * x)).unwrap_or(f64::NAN)
            }),
            eps: Arc::new(|x| 0.1 / (x * x)),
            probes: grid(0.5, 10.0, 0.5),
        }),
        "digamma-violating" => Ok(PerturbationFixture {
            name: "digamma-violating",
            builtin: BuiltinProblem::Digamma,
            problem: make_problem(BuiltinProblem::Digamma)?,
            base: Arc::new(|x| reference_digamma(x).unwrap_or(f64::NAN)),
            perturbed: Arc::new(|x| {
                reference_digamma(x).map(|v| v + 0.2 * libm::sin(x)).unwrap_or(f64::NAN)
            }),
            eps: Arc::new(|x| 0.1 / (x * x)),
            probes: grid(0.5, 10.0, 0.5),
        }),
        "shift2-mild" => Ok(PerturbationFixture {
            name: "shift2-mild",
            builtin: BuiltinProblem::ShiftP { p: 2.0 },
            problem: make_problem(BuiltinProblem::ShiftP { p: 2.0 })?,
            base: Arc::new(|x| reference_shift_p_solution(x, 2.0).unwrap_or(f64::NAN)),
            perturbed: Arc::new(|x| {
                reference_shift_p_solution(x, 2.0)
                    .map(|v| v + 0.05 / (x * x))
                    .unwrap_or(f64::NAN)
            }),
            eps: Arc::new(|x| 0.1 / (x * x)),
            probes: grid(1.0, 8.0, 1.0),
        }),
        "homog-mild" => {
            let c = 2.0f64;
            let exponent = libm::log2(c);
            Ok(PerturbationFixture {
                name: "homog-mild",
                builtin: BuiltinProblem::Homogeneity { c },
                problem: make_problem(BuiltinProblem::Homogeneity { c })?,
                base: Arc::new(move |x| libm::pow(x, exponent)),
                perturbed: Arc::new(move |x| libm::pow(x, exponent) * (1.0 + 0.05 / (x * x))),
                eps: Arc::new(|x| libm::log1p(0.1 / (x * x))),
                probes: grid(0.5, 8.0, 0.5),
            })
        }
        _ => Err(Error::UnknownFixture),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::residual;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Frozen from an independent partial-sum evaluation of
    // −γ + Σ_{k≥0} (1/(k+1) − 1/(x+k)).
    const PSI_1: f64 = -0.577_215_664_901_532_9;
    const PSI_HALF: f64 = -1.963_510_026_021_423_5;

    #[test]
    fn digamma_reference_values() {
        assert!((reference_digamma(1.0).unwrap() - PSI_1).abs() <= 1e-12);
        assert!((reference_digamma(2.0).unwrap() - (PSI_1 + 1.0)).abs() <= 1e-12);
        assert!((reference_digamma(0.5).unwrap() - PSI_HALF).abs() <= 1e-12);
        assert!(reference_digamma(0.0).is_err());
        assert!(reference_digamma(-3.0).is_err());
    }

    #[test]
    fn digamma_satisfies_recurrence_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(1e-3..100.0);
            let lhs = reference_digamma(x + 1.0).unwrap();
            let rhs = reference_digamma(x).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "x={x}");
        }
    }

    #[test]
    fn shift_p_reference() {
        assert_eq!(
            reference_shift_p_solution(1.7, 1.0).unwrap(),
            reference_digamma(1.7).unwrap()
        );
        let g1 = reference_shift_p_solution(1.0, 2.0).unwrap();
        assert!((g1 - 0.5 * PSI_HALF).abs() <= 1e-12);
        assert!((g1 + 0.981_755_013_010_711_7).abs() <= 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(0.1..50.0);
            let p: f64 = rng.gen_range(0.1..5.0);
            let lhs = reference_shift_p_solution(x + p, p).unwrap();
            let rhs = reference_shift_p_solution(x, p).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()), "x={x} p={p}");
        }
    }

    #[test]
    fn make_problem_examples() {
        let d = make_problem(BuiltinProblem::Digamma).unwrap();
        assert_eq!((d.phi)(3.0), 4.0);
        assert!(((d.a)(3.0) - 1.0 / 3.0).abs() < 1e-15);
        let s = make_problem(BuiltinProblem::ShiftP { p: 2.0 }).unwrap();
        assert_eq!((s.phi)(1.0), 3.0);
        assert_eq!((s.a)(1.0), 1.0);
        let h = make_problem(BuiltinProblem::Homogeneity { c: 2.0 }).unwrap();
        assert_eq!((h.phi)(1.5), 3.0);
        assert_eq!((h.a)(9.9), 2.0);
        assert!(make_problem(BuiltinProblem::ShiftP { p: -1.0 }).is_err());
        assert!(make_problem(BuiltinProblem::Homogeneity { c: 0.0 }).is_err());
    }

    #[test]
    fn shift_p1_matches_digamma_problem() {
        let d = make_problem(BuiltinProblem::Digamma).unwrap();
        let s = make_problem(BuiltinProblem::ShiftP { p: 1.0 }).unwrap();
        for x in [0.5, 1.0, 2.25, 9.0] {
            assert_eq!((d.phi)(x), (s.phi)(x));
            assert_eq!((d.a)(x), (s.a)(x));
        }
        assert_eq!(d.group, s.group);
    }

    #[test]
    fn mild_fixtures_satisfy_their_invariants() {
        for name in ["digamma-mild", "shift2-mild", "homog-mild"] {
            let fx = make_fixture(name).unwrap();
            for &x in &fx.probes {
                assert!(residual(&fx.problem, &fx.base, x).unwrap() <= 1e-10, "{name} base at {x}");
                let r = residual(&fx.problem, &fx.perturbed, x).unwrap();
                let bound = (fx.eps)(x);
                assert!(r <= bound * (1.0 + 1e-9) + 1e-12, "{name} perturbed at {x}: {r} > {bound}");
            }
        }
    }

    #[test]
    fn violating_fixture_breaks_residual_bound() {
        let fx = make_fixture("digamma-violating").unwrap();
        let broken = fx.probes.iter().any(|&x| {
            residual(&fx.problem, &fx.perturbed, x).unwrap() > (fx.eps)(x) * (1.0 + 1e-9) + 1e-12
        });
        assert!(broken);
    }

    #[test]
    fn homog_base_example() {
        let fx = make_fixture("homog-mild").unwrap();
        assert!(((fx.base)(4.0) - 4.0).abs() < 1e-12);
        assert!(make_fixture("no-such-fixture").is_err());
    }

    #[test]
    fn fixture_round_trip_solve() {
        let fx = make_fixture("digamma-mild").unwrap();
        let policy = crate::space::TruncationPolicy::default().with_abs_tol(1e-5).with_ratio_bound(0.9999);
        let report =
            crate::linear::solve_stability(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, &policy)
                .unwrap();
        for pr in &report.probes {
            let psi = reference_digamma(pr.x).unwrap();
            assert!((pr.value - psi).abs() <= 1e-8, "x={} err={}", pr.x, (pr.value - psi).abs());
        }
    }
}
