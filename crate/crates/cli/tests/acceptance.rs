//! Acceptance suite: one test per exit criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see the pass lines).
//!
//! These tests exercise the full stack — library solvers, certifier, and the
//! `fixcert` binary — against independently computed reference values.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::process::Command;
use std::time::Instant;

use fixcert_core::{
    a_n_at, apply_t_n, build_operator, certify_approximation, check_cocycle, check_condition_ii,
    check_condition_iii, eps_star, func, make_fixture, make_problem, orbit_point,
    reference_digamma, reference_shift_p_solution, solve_stability, tail_sum, uniqueness_check,
    BuiltinProblem, Error, Evaluator, MetricGroup, PointMap, TruncationPolicy, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(n: usize, desc: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("acceptance {n}: pass — {desc}"),
        Err(e) => {
            println!("acceptance {n}: FAIL — {desc}");
            resume_unwind(e);
        }
    }
}

/// Policy tuned for the 1/x² defect bounds of the shift fixtures: abs_tol
/// 1e-5 truncates around 5·10³ orbit terms, where the trailing term ratio
/// sits near 1 − 2/m ≈ 0.9996, inside the loosened ratio bound.
fn shift_policy() -> TruncationPolicy {
    TruncationPolicy::default().with_abs_tol(1e-5).with_ratio_bound(0.9999)
}

#[test]
fn acceptance_01_digamma_reconstruction() {
    criterion(1, "digamma reconstruction end-to-end", || {
        let started = Instant::now();
        let fx = make_fixture("digamma-mild").unwrap();
        let expected: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).collect();
        assert_eq!(fx.probes, expected);
        let report =
            solve_stability(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, &shift_policy())
                .unwrap();
        for p in &report.probes {
            let psi = reference_digamma(p.x).unwrap();
            assert!(
                (p.value - psi).abs() <= 1e-8,
                "x={}: |g - psi| = {:e}",
                p.x,
                (p.value - psi).abs()
            );
            assert!(
                p.dist_f_g <= p.eps_star + 1e-10,
                "x={}: d(f,g) = {} exceeds eps_star = {}",
                p.x,
                p.dist_f_g,
                p.eps_star
            );
        }
        assert!(started.elapsed().as_secs_f64() <= 10.0, "runtime budget exceeded");
    });
}

#[test]
fn acceptance_02_eps_star_oracle() {
    criterion(2, "eps_star matches the Basel-series oracle", || {
        let eps = func(|x| 1.0 / (x * x));
        let phi: PointMap = std::sync::Arc::new(|x| x + 1.0);
        // Deep truncation so the heuristic tail estimate is itself below the
        // 1e-6 target: ~10⁶ terms of the 1/k² series.
        let policy = TruncationPolicy::default()
            .with_abs_tol(5e-7)
            .with_max_terms(2_000_000)
            .with_ratio_bound(0.999_999);
        let pi2_6 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
        for (x, oracle) in [(1.0, pi2_6), (2.0, pi2_6 - 1.0)] {
            let s = eps_star(&eps, &phi, x, &policy).unwrap();
            let value = s.value + s.tail_bound;
            assert!(
                (value - oracle).abs() <= 1e-6,
                "x={x}: |eps_star - oracle| = {:e}",
                (value - oracle).abs()
            );
        }
    });
}

#[test]
fn acceptance_03_tail_bound_certification() {
    criterion(3, "iteration error bounded by the tail sum", || {
        let fx = make_fixture("digamma-mild").unwrap();
        let op = build_operator(&fx.problem);
        let policy = shift_policy();
        let report =
            solve_stability(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, &policy).unwrap();
        for p in &report.probes {
            for m in 0..=30usize {
                let iterated = apply_t_n(&op, &fx.perturbed, p.x, m).unwrap();
                let dist = fx.problem.group.dist(iterated, p.value).unwrap();
                let tail = tail_sum(&fx.eps, &fx.problem.phi, p.x, m, &policy).unwrap();
                let bound = tail.value + tail.tail_bound;
                assert!(
                    dist <= bound + 1e-10,
                    "x={} m={m}: d = {dist} > tail bound {bound}",
                    p.x
                );
            }
        }
    });
}

#[test]
fn acceptance_04_cocycle_identity() {
    criterion(4, "cocycle identity on random (x, n, m)", || {
        let problems = [
            make_problem(BuiltinProblem::Digamma).unwrap(),
            make_problem(BuiltinProblem::Homogeneity { c: 3.0 }).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for problem in &problems {
            for _ in 0..1000 {
                let x: f64 = rng.gen_range(0.2..25.0);
                let n: usize = rng.gen_range(1..=99);
                let m: usize = rng.gen_range(1..=(100 - n));
                let margin = check_cocycle(problem, x, n, m).unwrap();
                assert!(margin <= 1e-10, "x={x} n={n} m={m}: margin {margin:e}");
            }
        }
    });
}

#[test]
fn acceptance_05_conjugation_equivalence() {
    criterion(5, "iterated operator equals the closed form", || {
        let cases: [(BuiltinProblem, Evaluator); 3] = [
            (BuiltinProblem::Digamma, func(|x| (1.0 + x).ln())),
            (BuiltinProblem::ShiftP { p: 2.0 }, func(|x| 2.0 + x.sin())),
            (BuiltinProblem::Homogeneity { c: 2.0 }, func(|x| 2.0 + x.sin())),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for (builtin, f) in cases {
            let problem = make_problem(builtin).unwrap();
            let op = build_operator(&problem);
            for _ in 0..200 {
                let x: f64 = rng.gen_range(0.5..20.0);
                let n: usize = rng.gen_range(0..=50);
                let iterated = apply_t_n(&op, &f, x, n).unwrap();
                let a = a_n_at(&problem, x, n).unwrap();
                let closed = problem
                    .group
                    .op(problem.group.inverse(a).unwrap(), f(orbit_point(&problem.phi, x, n).unwrap()))
                    .unwrap();
                let d = problem.group.dist(iterated, closed).unwrap();
                assert!(d <= 1e-10, "{} x={x} n={n}: d = {d:e}", builtin.name());
            }
        }
    });
}

#[test]
fn acceptance_06_certifier_controls() {
    criterion(6, "certifier positive and negative controls", || {
        let policy = shift_policy();
        // Positive control with per-(probe, n) margins at N = 200.
        let mild = make_fixture("digamma-mild").unwrap();
        let cert =
            certify_approximation(&mild.problem, &mild.perturbed, &mild.eps, &mild.probes, 200, &policy)
                .unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        let c2 = check_condition_ii(&mild.problem, &mild.perturbed, &mild.eps, &mild.probes, 200)
            .unwrap();
        assert_eq!(c2.verdict, Verdict::Certified);
        assert_eq!(c2.margins.len(), mild.probes.len() * 200);
        assert!(c2.margins.iter().all(|m| m.margin >= 0.0));
        // Negative control names at least one offending (x, n).
        let bad = make_fixture("digamma-violating").unwrap();
        let cert =
            certify_approximation(&bad.problem, &bad.perturbed, &bad.eps, &bad.probes, 200, &policy)
                .unwrap();
        assert_eq!(cert.verdict, Verdict::Violated);
        assert!(!cert.violations.is_empty());
        // Implication chain: every fixture that certifies also passes the
        // orbit-inequality conditions, including the separate-δ form with δ = ε.
        for name in ["digamma-mild", "shift2-mild", "homog-mild"] {
            let fx = make_fixture(name).unwrap();
            let cert =
                certify_approximation(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, 200, &policy)
                    .unwrap();
            assert_eq!(cert.verdict, Verdict::Certified, "{name}");
            let c2 =
                check_condition_ii(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, 200).unwrap();
            assert_eq!(c2.verdict, Verdict::Certified, "{name} condition ii");
            let c3 = check_condition_iii(
                &fx.problem, &fx.perturbed, &fx.eps, &fx.eps, &fx.probes, 200, 10_000,
            )
            .unwrap();
            assert_eq!(c3.verdict, Verdict::Certified, "{name} condition iii");
        }
    });
}

#[test]
fn acceptance_07_uniqueness_of_witnesses() {
    criterion(7, "witnesses from different perturbations coincide", || {
        let fx = make_fixture("digamma-mild").unwrap();
        let policy = TruncationPolicy::default();
        let f1 = fx.perturbed.clone();
        let f2: Evaluator = func(|x| reference_digamma(x).unwrap_or(f64::NAN) - 0.03 / (x * x));
        let c1 =
            certify_approximation(&fx.problem, &f1, &fx.eps, &fx.probes, 200, &policy).unwrap();
        let c2 =
            certify_approximation(&fx.problem, &f2, &fx.eps, &fx.probes, 200, &policy).unwrap();
        let g1 = c1.witness.expect("mild perturbation certifies");
        let g2 = c2.witness.expect("mild perturbation certifies");
        let report =
            uniqueness_check(&fx.problem, &g1, &g2, &f1, &fx.eps, &fx.probes, 10_000, &policy)
                .unwrap();
        assert!(report.max_distance <= 1e-8, "max distance {:e}", report.max_distance);
        assert!(report.max_distance <= report.bound);
    });
}

#[test]
fn acceptance_08_divergence_safety() {
    criterion(8, "constant defect terminates as Divergent, CLI exit 2", || {
        // Library: the series ε* for constant ε diverges; summation must stop
        // within the term budget with a Divergent classification, not hang.
        let eps = func(|_| 0.3);
        let phi: PointMap = std::sync::Arc::new(|x| x + 1.0);
        let policy = TruncationPolicy::default().with_max_terms(5_000);
        match eps_star(&eps, &phi, 1.0, &policy) {
            Err(Error::Divergent { terms, .. }) => assert!(terms <= policy.max_terms),
            other => panic!("expected Divergent, got {other:?}"),
        }
        // Binary: same situation through a spec file exits with code 2.
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("divergent.json");
        std::fs::write(
            &spec,
            r#"{"equation": {"builtin": "digamma"}, "f": "ln(x)", "epsilon": "0.31",
                "probes": [1.0, 2.0], "policy": {"max_terms": 5000}}"#,
        )
        .unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_fixcert"))
            .args(["solve", "--spec", spec.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(2));
        let csv = String::from_utf8(out.stdout).unwrap();
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",divergent")), "csv was: {csv}");
    });
}

#[test]
fn acceptance_09_p_shift_corollary() {
    criterion(9, "p-shift solution recovered for p = 2", || {
        let fx = make_fixture("shift2-mild").unwrap();
        assert_eq!(fx.probes, (1..=8).map(f64::from).collect::<Vec<_>>());
        let report =
            solve_stability(&fx.problem, &fx.perturbed, &fx.eps, &fx.probes, &shift_policy())
                .unwrap();
        for p in &report.probes {
            let reference = reference_shift_p_solution(p.x, 2.0).unwrap();
            assert!(
                (p.value - reference).abs() <= 1e-8,
                "x={}: |g - reference| = {:e}",
                p.x,
                (p.value - reference).abs()
            );
        }
        // Spot value frozen from a partial-sum evaluation of ψ(1/2)/2.
        let g1 = report.probes[0].value;
        assert!((g1 - (-0.981_755_013_0)).abs() <= 1e-8, "g(1) = {g1}");
    });
}

#[test]
fn acceptance_10_group_property_suites() {
    criterion(10, "group laws and left-invariance on 1000 samples", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for group in [MetricGroup::AdditiveReals, MetricGroup::MultiplicativePositiveReals] {
            let sample = |rng: &mut ChaCha8Rng| -> f64 {
                match group {
                    MetricGroup::AdditiveReals => rng.gen_range(-100.0..100.0),
                    MetricGroup::MultiplicativePositiveReals => rng.gen_range(-5.0f64..5.0).exp(),
                }
            };
            let e = group.identity();
            for _ in 0..1000 {
                let (x, y, z) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
                // Group laws.
                let assoc_l = group.op(group.op(x, y).unwrap(), z).unwrap();
                let assoc_r = group.op(x, group.op(y, z).unwrap()).unwrap();
                assert!(group.dist(assoc_l, assoc_r).unwrap() <= 1e-12);
                assert!(group.dist(group.op(x, e).unwrap(), x).unwrap() <= 1e-12);
                assert!(group.dist(group.op(e, x).unwrap(), x).unwrap() <= 1e-12);
                let inv = group.inverse(x).unwrap();
                assert!(group.dist(group.op(x, inv).unwrap(), e).unwrap() <= 1e-12);
                // Metric axioms.
                assert!(group.dist(x, x).unwrap() <= 1e-12);
                let (dxy, dyx) = (group.dist(x, y).unwrap(), group.dist(y, x).unwrap());
                assert!((dxy - dyx).abs() <= 1e-12);
                assert!(dxy <= group.dist(x, z).unwrap() + group.dist(z, y).unwrap() + 1e-12);
                // Left-invariance.
                let lhs = group.dist(group.op(z, x).unwrap(), group.op(z, y).unwrap()).unwrap();
                assert!((lhs - dxy).abs() <= 1e-12, "left invariance: {lhs} vs {dxy}");
            }
        }
    });
}
