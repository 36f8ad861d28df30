//! Certified fixed-point solving and approximability certification for
//! functional equations in a single variable.
//!
//! The central object is the linear equation `g(φ(x)) = a(x) • g(x)` over a
//! complete metric group with a left-invariant metric. Given an approximate
//! solution `f` and a pointwise defect bound `ε`, the library reconstructs
//! the nearby exact solution `g` as the limit of `(Aₙ(x))⁻¹ • f(φⁿ(x))`,
//! reports truncated tail bounds for the distance `d(f, g)`, and decides
//! approximability through finite-horizon certificates with explicit margins.
//!
//! The crate is `no_std` (with `alloc`); all float math goes through `libm`.
//! IO, file formats, and the command-line front end live in the companion
//! `fixcert-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod apps;
pub mod certifier;
pub mod engine;
pub mod error;
pub mod group;
pub mod linear;
pub mod space;

pub use apps::{
    make_fixture, make_problem, reference_digamma, reference_shift_p_solution, BuiltinProblem,
    PerturbationFixture, FIXTURE_NAMES,
};
pub use certifier::{
    certify_approximation, check_condition_ii, check_condition_iii, uniqueness_check, Certificate,
    Condition, MarginRecord, UniquenessReport, Verdict,
};
pub use engine::{
    apply_t_n, check_c3, check_c3_with, check_lambda_contractive, eps_star_fn, solve, C3Verdict,
    ContractiveOperator, ContractivityCheck, ProbeReport, SolveReport,
};
pub use error::{DivergenceKind, Error};
pub use group::{MetricGroup, Tolerance};
pub use linear::{
    a_n, a_n_at, build_operator, check_cocycle, residual, solution_evaluator, solve_stability,
    LinearEquationProblem, ProductCache,
};
pub use space::{
    eps_star, func, orbit_point, sum_series, tail_sum, vanishes_along_orbit, ErrorFn, Evaluator,
    Orbit, OrbitVerdict, PointMap, SeriesSum, TruncationPolicy,
};
