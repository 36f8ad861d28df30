//! Specialization to the linear equation g(φ(x)) = a(x) • g(x).
//!
//! The accumulated coefficient Aₙ(x) = a(φⁿ⁻¹(x)) • … • a(φ(x)) • a(x)
//! relates orbit values of any solution: g(φⁿ(x)) = Aₙ(x) • g(x). The
//! associated defect operator (Tu)(x) = (a(x))⁻¹ • u(φ(x)) with
//! (Λδ)(x) = δ(φ(x)) turns the equation into a fixed-point problem, and the
//! closed-form iterate (Tⁿf)(x) = (Aₙ(x))⁻¹ • f(φⁿ(x)) makes each step one
//! group operation instead of a nested operator application.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::engine::{ContractiveOperator, ProbeReport, SolveReport};
use crate::error::{DivergenceKind, Error, Result};
use crate::group::{MetricGroup, Tolerance};
use crate::space::{eval_nonneg, sum_series, ErrorFn, Evaluator, Orbit, PointMap, TruncationPolicy};

/// The triple (φ, a, group) defining g(φ(x)) = a(x) • g(x).
#[derive(Clone)]
pub struct LinearEquationProblem {
    pub phi: PointMap,
    pub a: Evaluator,
    pub group: MetricGroup,
}

impl LinearEquationProblem {
    pub fn new(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: impl Fn(f64) -> f64 + Send + Sync + 'static,
        group: MetricGroup,
    ) -> Self {
        LinearEquationProblem { phi: Arc::new(phi), a: Arc::new(a), group }
    }

    /// Evaluates the coefficient a at an orbit point, naming the orbit index
    /// on domain escape (e.g. a(x) = 1/x pushed onto 0).
    fn eval_a(&self, p: f64, orbit_index: usize) -> Result<f64> {
        let v = (self.a)(p);
        self.group.validate(v).map_err(|_| Error::DomainViolation {
            value: p,
            orbit_index: Some(orbit_index),
            context: "coefficient a left the group at an orbit point",
        })
    }

    fn eval_f(&self, f: &Evaluator, p: f64) -> Result<f64> {
        self.group.validate(f(p)).map_err(|_| Error::EvaluationError {
            point: p,
            context: "evaluator produced an invalid group element",
        })
    }
}

/// Incrementally grown partial products Aₙ(base), with A₀ = identity.
///
/// The cache is tied to one base point and one solve context; extending from
/// Aₙ to Aₙ₊₁ costs a single group operation. Later orbit factors multiply on
/// the left: partials[n+1] = a(φⁿ(base)) • partials[n]. In the shipped
/// commutative groups the ordering is unobservable, but the contract is fixed
/// so a noncommutative instance cannot silently reorder.
pub struct ProductCache {
    orbit: Orbit,
    partials: Vec<f64>,
}

impl ProductCache {
    pub fn new(problem: &LinearEquationProblem, base: f64, cap: usize) -> Result<Self> {
        let orbit = Orbit::new(problem.phi.clone(), base, cap)?;
        let mut partials = Vec::new();
        partials.push(problem.group.identity());
        Ok(ProductCache { orbit, partials })
    }

    pub fn base(&self) -> f64 {
        self.orbit.base()
    }

    /// φⁿ(base) from the shared orbit memo.
    pub fn orbit_point(&mut self, n: usize) -> Result<f64> {
        self.orbit.get(n)
    }

    /// Aₙ(base), extending the cache as needed.
    pub fn product(&mut self, problem: &LinearEquationProblem, n: usize) -> Result<f64> {
        while self.partials.len() <= n {
            let k = self.partials.len() - 1;
            let factor = problem.eval_a(self.orbit.get(k)?, k)?;
            let next = problem.group.op(factor, self.partials[k])?;
            self.partials.push(next);
        }
        Ok(self.partials[n])
    }
}

/// Aₙ(x) through an incremental cache; A₀(x) is the identity.
pub fn a_n(
    problem: &LinearEquationProblem,
    cache: &mut ProductCache,
    n: usize,
) -> Result<f64> {
    cache.product(problem, n)
}

/// Aₙ(x) from a fresh cache.
pub fn a_n_at(problem: &LinearEquationProblem, x: f64, n: usize) -> Result<f64> {
    let mut cache = ProductCache::new(problem, x, n)?;
    cache.product(problem, n)
}

/// The defect d(f(φ(x)), a(x) • f(x)); zero exactly when f solves the
/// equation at x.
pub fn residual(problem: &LinearEquationProblem, f: &Evaluator, x: f64) -> Result<f64> {
    let fx = problem.eval_f(f, x)?;
    let f_phi = problem.eval_f(f, (problem.phi)(x))?;
    let ax = problem.eval_a(x, 0)?;
    problem.group.dist(f_phi, problem.group.op(ax, fx)?)
}

/// The operator pair of the equation: (Tu)(x) = (a(x))⁻¹ • u(φ(x)) and
/// (Λδ)(x) = δ(φ(x)). Fixed points of T are exactly the solutions.
pub fn build_operator(problem: &LinearEquationProblem) -> ContractiveOperator {
    let p_t = problem.clone();
    ContractiveOperator::new(
        problem.group,
        move |u: &Evaluator| {
            let u = u.clone();
            let p = p_t.clone();
            Arc::new(move |x| {
                let inv = match p.group.inverse((p.a)(x)) {
                    Ok(v) => v,
                    Err(_) => return f64::NAN,
                };
                p.group.op(inv, u((p.phi)(x))).unwrap_or(f64::NAN)
            })
        },
        {
            let phi = problem.phi.clone();
            move |d: &ErrorFn| {
                let d = d.clone();
                let phi = phi.clone();
                Arc::new(move |x| d(phi(x)))
            }
        },
    )
}

struct ProbeSolve {
    value: f64,
    iterations: usize,
    certified_bound: f64,
    eps_star: f64,
}

/// Closed-form solve at one point: walk the orbit summing ε while growing
/// Aₙ, stop once the remaining tail meets `abs_tol`, then report
/// (Aₙ(x))⁻¹ • f(φⁿ(x)).
fn solve_probe(
    problem: &LinearEquationProblem,
    f: &Evaluator,
    eps: &ErrorFn,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<ProbeSolve> {
    let mut cache = ProductCache::new(problem, x, policy.max_terms + 1)?;
    let mut partials = Vec::new();
    let mut running = 0.0;
    let sum = {
        let cache = &mut cache;
        sum_series(
            |k| {
                let p = cache.orbit_point(k)?;
                let v = eval_nonneg(eps, p, "error function must be finite and nonnegative")?;
                running += v;
                partials.push(running);
                Ok(v)
            },
            policy,
        )
    }
    .map_err(|e| match e {
        Error::Divergent { kind: DivergenceKind::SlowConvergence, terms, .. } => {
            Error::NoConvergence { point: x, terms }
        }
        other => other,
    })?;
    let mut m = partials.len();
    for k in 0..=partials.len() {
        let head = if k == 0 { 0.0 } else { partials[k - 1] };
        if (sum.value - head) + sum.tail_bound <= policy.abs_tol {
            m = k;
            break;
        }
    }
    let a_m = cache.product(problem, m)?;
    let f_m = problem.eval_f(f, cache.orbit_point(m)?)?;
    let g_x = problem.group.op(problem.group.inverse(a_m)?, f_m)?;
    let head = if m == 0 { 0.0 } else { partials[m - 1] };
    Ok(ProbeSolve {
        value: g_x,
        iterations: m,
        certified_bound: (sum.value - head) + sum.tail_bound,
        eps_star: sum.value + sum.tail_bound,
    })
}

/// Reconstructs the exact solution near `f` at each probe, certified by the
/// truncated tail of ε* (the orbit sum of ε).
///
/// The defect hypothesis residual(x) ≤ ε(x) is verified with slack at every
/// probe before any iteration.
pub fn solve_stability(
    problem: &LinearEquationProblem,
    f: &Evaluator,
    eps: &ErrorFn,
    probes: &[f64],
    policy: &TruncationPolicy,
) -> Result<SolveReport> {
    policy.validate()?;
    let tol = Tolerance::default();
    let mut reports = Vec::with_capacity(probes.len());
    for &x in probes {
        let res = residual(problem, f, x)?;
        let eps_x = eval_nonneg(eps, x, "error function must be finite and nonnegative")?;
        if res > eps_x * (1.0 + tol.rtol) + tol.atol {
            return Err(Error::DefectViolated { point: x, margin: res - eps_x });
        }
        let solved = solve_probe(problem, f, eps, x, policy)?;
        let f_x = problem.eval_f(f, x)?;
        reports.push(ProbeReport {
            x,
            value: solved.value,
            iterations: solved.iterations,
            certified_bound: solved.certified_bound,
            eps_star: solved.eps_star,
            dist_f_g: problem.group.dist(f_x, solved.value)?,
            converged: true,
        });
    }
    Ok(SolveReport { probes: reports })
}

/// The reconstructed solution as an on-demand evaluator (the same limit the
/// solver reports, computable at any domain point). Internal failures
/// surface as NaN and are rejected wherever the value is next consumed.
pub fn solution_evaluator(
    problem: &LinearEquationProblem,
    f: &Evaluator,
    eps: &ErrorFn,
    policy: &TruncationPolicy,
) -> Evaluator {
    let problem = problem.clone();
    let f = f.clone();
    let eps = eps.clone();
    let policy = *policy;
    Arc::new(move |x| match solve_probe(&problem, &f, &eps, x, &policy) {
        Ok(s) => s.value,
        Err(_) => f64::NAN,
    })
}

/// Margin of the cocycle identity Aₙ(φᵐ(x)) = A_{n+m}(x) • (Aₘ(x))⁻¹:
/// the metric distance between the two sides.
pub fn check_cocycle(
    problem: &LinearEquationProblem,
    x: f64,
    n: usize,
    m: usize,
) -> Result<f64> {
    debug_assert!(n >= 1 && m >= 1);
    let mut cache = ProductCache::new(problem, x, n + m)?;
    let shifted_base = cache.orbit_point(m)?;
    let lhs = a_n_at(problem, shifted_base, n)?;
    let a_nm = cache.product(problem, n + m)?;
    let a_m = cache.product(problem, m)?;
    let rhs = problem.group.op(a_nm, problem.group.inverse(a_m)?)?;
    problem.group.dist(lhs, rhs)
}
