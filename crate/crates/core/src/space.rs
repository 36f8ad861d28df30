//! Function spaces as black-box evaluators, orbit computation under a
//! self-map φ, and truncated series summation with divergence detection.
//!
//! Functions are probed only along orbits of user-supplied points; there is
//! no global domain representation. All evaluators must be pure: repeated
//! evaluation at the same point must yield identical results.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{DivergenceKind, Error, Result};

/// A self-map φ of the domain.
pub type PointMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A mapping from domain points to group elements (the functions f, g, u, v).
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A mapping from domain points to nonnegative reals (ε, δ, ε*).
pub type ErrorFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Wraps a closure into the shared evaluator representation.
pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Evaluator {
    Arc::new(f)
}

fn check_point(x: f64, orbit_index: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::DomainViolation {
            value: x,
            orbit_index: Some(orbit_index),
            context: "orbit escaped to a non-finite point",
        })
    }
}

/// Evaluates an error function, enforcing the nonnegative-and-finite contract.
pub(crate) fn eval_nonneg(eps: &ErrorFn, x: f64, context: &'static str) -> Result<f64> {
    let v = eps(x);
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::EvaluationError { point: x, context })
    }
}

/// Returns φⁿ(x) without memoization; φ⁰(x) = x.
pub fn orbit_point(phi: &PointMap, x: f64, n: usize) -> Result<f64> {
    let mut p = check_point(x, 0)?;
    for k in 0..n {
        p = check_point(phi(p), k + 1)?;
    }
    Ok(p)
}

/// Memoized forward orbit x, φ(x), φ²(x), … of a base point.
///
/// An orbit belongs to a single solve context; it is not shared across
/// concurrent contexts.
pub struct Orbit {
    map: PointMap,
    memo: Vec<f64>,
    cap: usize,
}

impl Orbit {
    pub fn new(map: PointMap, base: f64, cap: usize) -> Result<Self> {
        let base = check_point(base, 0)?;
        let mut memo = Vec::new();
        memo.push(base);
        Ok(Orbit { map, memo, cap })
    }

    pub fn base(&self) -> f64 {
        self.memo[0]
    }

    /// Returns φⁿ(base), extending the memo as needed.
    pub fn get(&mut self, n: usize) -> Result<f64> {
        if n > self.cap {
            return Err(Error::CapExceeded { requested: n, cap: self.cap });
        }
        while self.memo.len() <= n {
            let k = self.memo.len();
            let next = check_point((self.map)(self.memo[k - 1]), k)?;
            self.memo.push(next);
        }
        Ok(self.memo[n])
    }
}

/// Controls truncation of the infinite sums: the exact series of the theory
/// are replaced by partial sums with a heuristic geometric tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Stop once the estimated tail drops to this value.
    pub abs_tol: f64,
    /// Hard budget of term evaluations.
    pub max_terms: usize,
    /// Number of trailing term ratios inspected by the divergence heuristic.
    pub ratio_window: usize,
    /// Trailing ratios at or above this bound invalidate the tail estimate.
    pub ratio_bound: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            abs_tol: 1e-10,
            max_terms: 1_000_000,
            ratio_window: 8,
            ratio_bound: 0.999,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidPolicy { detail: "abs_tol must be > 0" });
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidPolicy { detail: "max_terms must be positive" });
        }
        if self.ratio_window == 0 {
            return Err(Error::InvalidPolicy { detail: "ratio_window must be positive" });
        }
        if !(self.ratio_bound > 0.0 && self.ratio_bound < 1.0) {
            return Err(Error::InvalidPolicy { detail: "ratio_bound must lie in (0,1)" });
        }
        Ok(())
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    /// Polynomially decaying series have trailing ratios approaching 1; a
    /// tight tolerance is only reachable for them with a ratio bound closer
    /// to 1 than the default (roughly, `1 − p/m` must stay below the bound
    /// until the tail estimate meets `abs_tol` at term m).
    pub fn with_ratio_bound(mut self, ratio_bound: f64) -> Self {
        self.ratio_bound = ratio_bound;
        self
    }
}

/// Result of a truncated series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    /// Partial sum over `terms_used` terms.
    pub value: f64,
    /// Heuristic bound on the dropped tail, valid under geometric decay of
    /// the trailing terms. Zero only when the last term itself was zero.
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Sums `Σ_{k≥0} term(k)` for nonnegative terms, stopping at the first
/// partial sum whose estimated tail `a·r/(1−r)` meets `abs_tol`, where `r`
/// is the maximum ratio over the trailing `ratio_window` terms.
///
/// A zero term terminates the sum with a zero tail (the geometric heuristic
/// treats it as fully decayed). If the budget runs out the summation is
/// rejected as `Divergent`, classified `NonSummable` when the trailing ratio
/// reached `ratio_bound` (or terms stopped decreasing) and `SlowConvergence`
/// when terms shrink but the tolerance was never met.
pub fn sum_series(
    mut term: impl FnMut(usize) -> Result<f64>,
    policy: &TruncationPolicy,
) -> Result<SeriesSum> {
    policy.validate()?;
    let mut sum = 0.0;
    let mut window: Vec<f64> = Vec::with_capacity(policy.ratio_window + 1);
    let mut last = 0.0;
    let mut ratio = f64::INFINITY;
    for m in 0..policy.max_terms {
        let a = term(m)?;
        sum += a;
        last = a;
        if window.len() == policy.ratio_window + 1 {
            window.remove(0);
        }
        window.push(a);
        if a == 0.0 {
            return Ok(SeriesSum { value: sum, tail_bound: 0.0, terms_used: m + 1 });
        }
        if window.len() == policy.ratio_window + 1 {
            ratio = trailing_ratio(&window);
            if ratio < policy.ratio_bound {
                let tail = a * ratio / (1.0 - ratio);
                if tail <= policy.abs_tol {
                    return Ok(SeriesSum { value: sum, tail_bound: tail, terms_used: m + 1 });
                }
            }
        }
    }
    let kind = if ratio >= policy.ratio_bound {
        DivergenceKind::NonSummable
    } else {
        DivergenceKind::SlowConvergence
    };
    Err(Error::Divergent { kind, terms: policy.max_terms, last_term: last, ratio })
}

fn trailing_ratio(window: &[f64]) -> f64 {
    let mut r: f64 = 0.0;
    for pair in window.windows(2) {
        let q = if pair[0] == 0.0 { f64::INFINITY } else { pair[1] / pair[0] };
        if q > r {
            r = q;
        }
    }
    r
}

/// Truncated ε*(x) = Σ_{k≥0} ε(φᵏ(x)).
pub fn eps_star(
    eps: &ErrorFn,
    phi: &PointMap,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesSum> {
    tail_sum(eps, phi, x, 0, policy)
}

/// Truncated tail Σ_{k≥m} ε(φᵏ(x)), with the same semantics as [`eps_star`].
pub fn tail_sum(
    eps: &ErrorFn,
    phi: &PointMap,
    x: f64,
    m: usize,
    policy: &TruncationPolicy,
) -> Result<SeriesSum> {
    policy.validate()?;
    let mut orbit = Orbit::new(phi.clone(), x, m.saturating_add(policy.max_terms))?;
    sum_series(
        |k| {
            let p = orbit.get(m + k)?;
            eval_nonneg(eps, p, "error function must be finite and nonnegative")
        },
        policy,
    )
}

/// Verdict of a vanishing-along-orbit check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitVerdict {
    Vanishes,
    Violated,
    Inconclusive,
}

/// Decides numerically whether δ(φⁿ(x)) → 0, i.e. whether δ behaves as a
/// member of the vanishing class E_φ along this particular orbit.
///
/// Vanishes when the running maximum over the final quarter of the horizon
/// stays at or below `tol`; Violated when the sequence exceeds ten times its
/// initial value; Inconclusive otherwise. Limits are not finitely decidable,
/// so a Vanishes verdict is evidence at the stated horizon, not a proof.
pub fn vanishes_along_orbit(
    delta: &ErrorFn,
    phi: &PointMap,
    x: f64,
    horizon: usize,
    tol: f64,
) -> Result<OrbitVerdict> {
    debug_assert!(horizon >= 1);
    let mut p = check_point(x, 0)?;
    let first = eval_nonneg(delta, p, "delta must be finite and nonnegative")?;
    let mut values = Vec::with_capacity(horizon.min(4096));
    for n in 0..horizon {
        let v = if n == 0 {
            first
        } else {
            eval_nonneg(delta, p, "delta must be finite and nonnegative")?
        };
        if v > 10.0 * first {
            return Ok(OrbitVerdict::Violated);
        }
        values.push(v);
        match check_point(phi(p), n + 1) {
            Ok(next) => p = next,
            // Rapidly expanding maps (e.g. x ↦ 2x) push the orbit out of the
            // representable range well before a large horizon; judge on the
            // steps actually observed instead of failing the whole check.
            Err(_) => break,
        }
    }
    let observed = values.len();
    let window_start = observed - observed / 4;
    let window_max = values[window_start..].iter().fold(0.0f64, |acc, &v| acc.max(v));
    if window_max <= tol {
        Ok(OrbitVerdict::Vanishes)
    } else {
        Ok(OrbitVerdict::Inconclusive)
    }
}
