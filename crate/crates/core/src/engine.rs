//! Generic fixed-point engine for Λ-contractive operators on function space.
//!
//! An operator pair (T, Λ) is Λ-contractive when pointwise closeness δ of two
//! inputs implies pointwise closeness Λδ of their images. Under a summable
//! defect ε the iterates Tⁿf converge to the unique nearby fixed point g, and
//! the dropped tail Σ_{k≥m}(Λᵏε)(x) certifies the distance of the m-th
//! iterate from g. The engine stops on that tail bound, not on iterate
//! stalls, because the tail is the quantity the certification reports.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{DivergenceKind, Error, Result};
use crate::group::{MetricGroup, Tolerance};
use crate::space::{eval_nonneg, sum_series, ErrorFn, Evaluator, TruncationPolicy};

/// An operator T on evaluators together with its companion Λ on error
/// functions, over a fixed metric group.
///
/// Both transforms are black boxes; inner closures signal failures by
/// producing non-finite values, which every consumer converts into errors at
/// the evaluation site.
pub struct ContractiveOperator {
    group: MetricGroup,
    apply_t: Arc<dyn Fn(&Evaluator) -> Evaluator + Send + Sync>,
    apply_lambda: Arc<dyn Fn(&ErrorFn) -> ErrorFn + Send + Sync>,
}

impl ContractiveOperator {
    pub fn new(
        group: MetricGroup,
        apply_t: impl Fn(&Evaluator) -> Evaluator + Send + Sync + 'static,
        apply_lambda: impl Fn(&ErrorFn) -> ErrorFn + Send + Sync + 'static,
    ) -> Self {
        ContractiveOperator {
            group,
            apply_t: Arc::new(apply_t),
            apply_lambda: Arc::new(apply_lambda),
        }
    }

    pub fn group(&self) -> MetricGroup {
        self.group
    }

    pub fn apply_t(&self, f: &Evaluator) -> Evaluator {
        (self.apply_t)(f)
    }

    pub fn apply_lambda(&self, delta: &ErrorFn) -> ErrorFn {
        (self.apply_lambda)(delta)
    }

    /// Tⁿ applied to `f`; n = 0 returns `f` unchanged.
    pub fn iterate(&self, f: &Evaluator, n: usize) -> Evaluator {
        let mut g = f.clone();
        for _ in 0..n {
            g = self.apply_t(&g);
        }
        g
    }
}

/// Evaluates (Tⁿf)(x).
pub fn apply_t_n(op: &ContractiveOperator, f: &Evaluator, x: f64, n: usize) -> Result<f64> {
    let g = op.iterate(f, n);
    let v = g(x);
    op.group().validate(v).map_err(|_| Error::EvaluationError {
        point: x,
        context: "iterated operator produced an invalid group element",
    })
}

/// Per-probe outcome of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub x: f64,
    /// g(x), the reconstructed fixed-point value.
    pub value: f64,
    /// Number of operator applications m.
    pub iterations: usize,
    /// Truncated tail Σ_{k≥m}(Λᵏε)(x): certified distance of the reported
    /// value from the limit (heuristic tail estimate included).
    pub certified_bound: f64,
    /// Truncated ε*(x) = Σ_{k≥0}(Λᵏε)(x) including the tail estimate.
    pub eps_star: f64,
    /// d(f(x), g(x)).
    pub dist_f_g: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub probes: Vec<ProbeReport>,
}

fn eval_in_group(group: MetricGroup, f: &Evaluator, x: f64) -> Result<f64> {
    group.validate(f(x)).map_err(|_| Error::EvaluationError {
        point: x,
        context: "evaluator produced an invalid group element",
    })
}

/// Sums Σ_k (Λᵏε)(x), recording partial sums. The k-th term is evaluated
/// through k nested Λ applications, so this is quadratic in the term count;
/// the orbit-composition specialization in `linear` avoids this cost.
fn lambda_series(
    op: &ContractiveOperator,
    eps: &ErrorFn,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<(crate::space::SeriesSum, Vec<f64>)> {
    let mut partials = Vec::new();
    let mut delta = eps.clone();
    let mut running = 0.0;
    let mut k_done = 0usize;
    let sum = sum_series(
        |k| {
            debug_assert_eq!(k, k_done);
            let v = eval_nonneg(&delta, x, "iterated error function must stay finite and nonnegative")?;
            delta = op.apply_lambda(&delta);
            running += v;
            partials.push(running);
            k_done += 1;
            Ok(v)
        },
        policy,
    )?;
    Ok((sum, partials))
}

/// Picks the smallest m whose remaining tail (S − S_m) + tail_bound meets the
/// tolerance. Partial sums are nondecreasing, so a linear scan suffices.
fn stopping_index(partials: &[f64], sum: &crate::space::SeriesSum, abs_tol: f64) -> usize {
    let total = sum.value;
    for m in 0..=partials.len() {
        let head = if m == 0 { 0.0 } else { partials[m - 1] };
        if (total - head) + sum.tail_bound <= abs_tol {
            return m;
        }
    }
    partials.len()
}

/// Iterates T to its fixed point at each probe with certified tail bounds.
///
/// The defect hypothesis d((Tf)(x), f(x)) ≤ ε(x) is verified (slack-tolerant)
/// at every probe before iterating. Series rejection maps `NonSummable` to
/// `Divergent` and `SlowConvergence` to `NoConvergence`.
pub fn solve(
    op: &ContractiveOperator,
    f: &Evaluator,
    eps: &ErrorFn,
    probes: &[f64],
    policy: &TruncationPolicy,
) -> Result<SolveReport> {
    policy.validate()?;
    let tol = Tolerance::default();
    let group = op.group();
    let tf = op.apply_t(f);
    let mut reports = Vec::with_capacity(probes.len());
    for &x in probes {
        let f_x = eval_in_group(group, f, x)?;
        let tf_x = eval_in_group(group, &tf, x)?;
        let defect = group.dist(tf_x, f_x)?;
        let eps_x = eval_nonneg(eps, x, "error function must be finite and nonnegative")?;
        if defect > eps_x * (1.0 + tol.rtol) + tol.atol {
            return Err(Error::DefectViolated { point: x, margin: defect - eps_x });
        }
        let (sum, partials) = lambda_series(op, eps, x, policy).map_err(|e| match e {
            Error::Divergent { kind: DivergenceKind::SlowConvergence, terms, .. } => {
                Error::NoConvergence { point: x, terms }
            }
            other => other,
        })?;
        let m = stopping_index(&partials, &sum, policy.abs_tol);
        let g_x = apply_t_n(op, f, x, m)?;
        let head = if m == 0 { 0.0 } else { partials[m - 1] };
        reports.push(ProbeReport {
            x,
            value: g_x,
            iterations: m,
            certified_bound: (sum.value - head) + sum.tail_bound,
            eps_star: sum.value + sum.tail_bound,
            dist_f_g: group.dist(f_x, g_x)?,
            converged: true,
        });
    }
    Ok(SolveReport { probes: reports })
}

/// A single contractivity violation: sample index, probe point, and by how
/// much d(Tu, Tv) exceeded (Λδ) there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractivityViolation {
    pub sample: usize,
    pub probe: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContractivityCheck {
    pub violations: Vec<ContractivityViolation>,
    /// Samples whose premise d(u, v) ≤ δ already failed at some probe; the
    /// contractivity implication is vacuous for them and they are skipped.
    pub vacuous: Vec<usize>,
}

/// Sampled check of the contractivity definition: for each (u, v, δ) sample
/// whose premise holds on the probe set, verifies
/// d((Tu)(x), (Tv)(x)) ≤ (Λδ)(x) + slack at every probe.
pub fn check_lambda_contractive(
    op: &ContractiveOperator,
    samples: &[(Evaluator, Evaluator, ErrorFn)],
    probes: &[f64],
) -> Result<ContractivityCheck> {
    let tol = Tolerance::default();
    let group = op.group();
    let mut out = ContractivityCheck::default();
    'samples: for (i, (u, v, delta)) in samples.iter().enumerate() {
        for &x in probes {
            let d_uv = group.dist(eval_in_group(group, u, x)?, eval_in_group(group, v, x)?)?;
            let d_x = eval_nonneg(delta, x, "delta must be finite and nonnegative")?;
            if d_uv > d_x * (1.0 + tol.rtol) + tol.atol {
                out.vacuous.push(i);
                continue 'samples;
            }
        }
        let tu = op.apply_t(u);
        let tv = op.apply_t(v);
        let ld = op.apply_lambda(delta);
        for &x in probes {
            let lhs = group.dist(eval_in_group(group, &tu, x)?, eval_in_group(group, &tv, x)?)?;
            let bound = eval_nonneg(&ld, x, "Lambda delta must be finite and nonnegative")?;
            let slack = bound * (1.0 + tol.rtol) + tol.atol;
            if lhs > slack {
                out.violations.push(ContractivityViolation { sample: i, probe: x, margin: lhs - bound });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C3Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// ε* as an on-demand error function: Σ_k (Λᵏε)(y) at any point, summed under
/// `policy`. Evaluation failures surface as infinity so that downstream
/// checks reject them at the evaluation site.
pub fn eps_star_fn(op: &ContractiveOperator, eps: &ErrorFn, policy: &TruncationPolicy) -> ErrorFn {
    let op_lambda = op.apply_lambda.clone();
    let eps = eps.clone();
    let policy = *policy;
    Arc::new(move |y| {
        let mut delta = eps.clone();
        let r = sum_series(
            |_| {
                let v = delta(y);
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::EvaluationError {
                        point: y,
                        context: "iterated error function must stay finite and nonnegative",
                    });
                }
                delta = op_lambda(&delta);
                Ok(v)
            },
            &policy,
        );
        match r {
            Ok(s) => s.value + s.tail_bound,
            Err(_) => f64::INFINITY,
        }
    })
}

/// Checks condition (C₃): (Λⁿε*) → 0 pointwise, on sampled probes up to
/// `n_max`. ε* is first summed at every probe; a rejected sum is reported as
/// `SeriesDiverges` there.
pub fn check_c3(
    op: &ContractiveOperator,
    eps: &ErrorFn,
    probes: &[f64],
    n_max: usize,
    tol: f64,
    policy: &TruncationPolicy,
) -> Result<C3Verdict> {
    for &x in probes {
        let mut delta = eps.clone();
        let direct = sum_series(
            |_| {
                let v = eval_nonneg(&delta, x, "error function must be finite and nonnegative")?;
                delta = op.apply_lambda(&delta);
                Ok(v)
            },
            policy,
        );
        if direct.is_err() {
            return Err(Error::SeriesDiverges { point: x });
        }
    }
    check_c3_with(op, &eps_star_fn(op, eps, policy), probes, n_max, tol)
}

/// Same as [`check_c3`] but against an explicitly supplied ε* function.
pub fn check_c3_with(
    op: &ContractiveOperator,
    eps_star: &ErrorFn,
    probes: &[f64],
    n_max: usize,
    tol: f64,
) -> Result<C3Verdict> {
    let mut all_hold = true;
    for &x in probes {
        let initial = eval_nonneg(eps_star, x, "eps-star must be finite and nonnegative")?;
        let mut delta = eps_star.clone();
        let mut last = initial;
        for _ in 1..=n_max {
            delta = op.apply_lambda(&delta);
            last = eval_nonneg(&delta, x, "iterated eps-star must stay finite and nonnegative")?;
            if last > 10.0 * initial && initial > 0.0 {
                return Ok(C3Verdict::Violated);
            }
        }
        if last > tol {
            all_hold = false;
        }
    }
    Ok(if all_hold { C3Verdict::Holds } else { C3Verdict::Inconclusive })
}
