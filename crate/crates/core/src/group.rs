//! Complete metric groups with a left-invariant metric.
//!
//! Two concrete instances ship: the reals under addition with the absolute
//! difference, and the strictly positive reals under multiplication with the
//! log-ratio distance `|ln x − ln y|`. The log-ratio metric is invariant
//! under left translation (`d(zx, zy) = d(x, y)`) and complete on `(0, ∞)`,
//! which the plain absolute difference is not.
//!
//! Group elements are plain `f64` scalars in both instances. Callers must not
//! rely on that representation beyond these two instances; every bound
//! transfer in the solvers goes through `op`/`inverse`/`dist` only.

use crate::error::{Error, Result};

/// Absolute/relative tolerance pair used for all approximate comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { atol: 1e-12, rtol: 1e-12 }
    }
}

impl Tolerance {
    /// Slack allowance for comparing `value ≤ bound` at the given scale.
    pub fn slack(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }

    pub fn approx_eq(&self, a: f64, b: f64) -> bool {
        let scale = if a.abs() > b.abs() { a.abs() } else { b.abs() };
        (a - b).abs() <= self.slack(scale)
    }
}

/// A complete metric group `(G, •, d)` with `d` invariant to left translation.
///
/// Completeness is a hypothesis of the underlying theory that cannot be
/// verified numerically; both shipped instances are complete by construction
/// and it is assumed, not tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricGroup {
    /// `(ℝ, +)` with `d(x, y) = |x − y|`.
    AdditiveReals,
    /// `((0, ∞), ·)` with `d(x, y) = |ln x − ln y|`.
    MultiplicativePositiveReals,
}

impl MetricGroup {
    pub fn name(&self) -> &'static str {
        match self {
            MetricGroup::AdditiveReals => "additive",
            MetricGroup::MultiplicativePositiveReals => "multiplicative",
        }
    }

    /// Instance lookup by the name used in problem-spec files.
    pub fn by_name(name: &str) -> Option<MetricGroup> {
        match name {
            "additive" => Some(MetricGroup::AdditiveReals),
            "multiplicative" => Some(MetricGroup::MultiplicativePositiveReals),
            _ => None,
        }
    }

    /// Checks that `x` is a valid element of the carrier.
    pub fn validate(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::DomainViolation {
                value: x,
                orbit_index: None,
                context: "group element must be finite",
            });
        }
        if *self == MetricGroup::MultiplicativePositiveReals && x <= 0.0 {
            return Err(Error::DomainViolation {
                value: x,
                orbit_index: None,
                context: "multiplicative group element must be > 0",
            });
        }
        Ok(x)
    }

    pub fn identity(&self) -> f64 {
        match self {
            MetricGroup::AdditiveReals => 0.0,
            MetricGroup::MultiplicativePositiveReals => 1.0,
        }
    }

    pub fn op(&self, x: f64, y: f64) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        let r = match self {
            MetricGroup::AdditiveReals => x + y,
            MetricGroup::MultiplicativePositiveReals => x * y,
        };
        self.validate(r)
    }

    pub fn inverse(&self, x: f64) -> Result<f64> {
        self.validate(x)?;
        let r = match self {
            MetricGroup::AdditiveReals => -x,
            MetricGroup::MultiplicativePositiveReals => 1.0 / x,
        };
        self.validate(r)
    }

    /// Left-invariant metric: `d(zx, zy) = d(x, y)` for every `z`.
    pub fn dist(&self, x: f64, y: f64) -> Result<f64> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(match self {
            MetricGroup::AdditiveReals => (x - y).abs(),
            MetricGroup::MultiplicativePositiveReals => (libm::log(x) - libm::log(y)).abs(),
        })
    }
}
