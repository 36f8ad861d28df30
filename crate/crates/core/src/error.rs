//! Error types shared across the crate.

use core::fmt;

/// Why a series summation was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    /// Trailing term ratio at or above the configured bound (ratio ≈ 1 or
    /// growing): the series cannot be summed by the geometric heuristic.
    NonSummable,
    /// Terms shrink (ratio below the bound) but the tail estimate never met
    /// the tolerance within the term budget.
    SlowConvergence,
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceKind::NonSummable => write!(f, "non-summable"),
            DivergenceKind::SlowConvergence => write!(f, "slow convergence"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the group instance or of a problem
    /// function. `orbit_index` names the iterate at which the escape happened
    /// when the evaluation walked an orbit.
    DomainViolation {
        value: f64,
        orbit_index: Option<usize>,
        context: &'static str,
    },
    /// A user-supplied function produced a non-finite or otherwise invalid
    /// result at `point`.
    EvaluationError { point: f64, context: &'static str },
    /// Orbit iterate requested beyond the materialization cap.
    CapExceeded { requested: usize, cap: usize },
    /// Series summation rejected after `terms` evaluations.
    Divergent {
        kind: DivergenceKind,
        terms: usize,
        last_term: f64,
        ratio: f64,
    },
    /// The defect hypothesis d((Tf)(x), f(x)) ≤ ε(x) failed at a probe.
    DefectViolated { point: f64, margin: f64 },
    /// Iteration budget exhausted before the tail bound met the tolerance.
    NoConvergence { point: f64, terms: usize },
    /// ε* is not finite at a probe, so a condition depending on it is void.
    SeriesDiverges { point: f64 },
    /// The Cauchy stopping bound ε(φⁿ(x)) failed to shrink below tolerance
    /// within the term budget (ε does not vanish along the orbit numerically).
    CauchyStall { point: f64, terms: usize, bound: f64 },
    /// A claimed solution failed the closeness or solution-property
    /// precondition of a uniqueness check.
    PreconditionViolated { point: f64, detail: &'static str },
    /// Invalid parameters for a built-in problem.
    InvalidParams { detail: &'static str },
    /// Unrecognized fixture name.
    UnknownFixture,
    /// A truncation policy field is out of range.
    InvalidPolicy { detail: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DomainViolation { value, orbit_index, context } => match orbit_index {
                Some(n) => write!(f, "domain violation at orbit index {n} (value {value}): {context}"),
                None => write!(f, "domain violation (value {value}): {context}"),
            },
            Error::EvaluationError { point, context } => {
                write!(f, "evaluation error at {point}: {context}")
            }
            Error::CapExceeded { requested, cap } => {
                write!(f, "orbit index {requested} exceeds cap {cap}")
            }
            Error::Divergent { kind, terms, last_term, ratio } => write!(
                f,
                "series divergent ({kind}) after {terms} terms (last term {last_term}, trailing ratio {ratio})"
            ),
            Error::DefectViolated { point, margin } => {
                write!(f, "defect hypothesis violated at {point} by {margin}")
            }
            Error::NoConvergence { point, terms } => {
                write!(f, "no convergence at {point} within {terms} iterations")
            }
            Error::SeriesDiverges { point } => write!(f, "epsilon-star series diverges at {point}"),
            Error::CauchyStall { point, terms, bound } => write!(
                f,
                "Cauchy bound stalled at {bound} after {terms} terms at {point}"
            ),
            Error::PreconditionViolated { point, detail } => {
                write!(f, "precondition violated at {point}: {detail}")
            }
            Error::InvalidParams { detail } => write!(f, "invalid parameters: {detail}"),
            Error::UnknownFixture => write!(f, "unknown fixture name"),
            Error::InvalidPolicy { detail } => write!(f, "invalid truncation policy: {detail}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
