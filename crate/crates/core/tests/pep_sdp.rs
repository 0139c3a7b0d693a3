//! Cross-module checks between the PEP builders and the SDP solver.

use gradrate::classes::CurvatureClass;
use gradrate::pep::{build_pep_pl, build_pep_qgg};
use gradrate::sdp::{solve, SdpStatus, SolveOptions};

fn cls(mu: f64, l: f64) -> CurvatureClass {
    CurvatureClass::new(mu, l).unwrap()
}

/// Worst-case ratios are invariant under rescaling all curvatures by `c`
/// and the step by `1/c`.
#[test]
fn scale_covariance_of_pl_problem() {
    let base = solve(
        &build_pep_pl(&cls(-1.0, 1.0), 0.5, 1.2).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(base.status, SdpStatus::Optimal);
    for &c in &[0.5, 2.0] {
        let scaled = solve(
            &build_pep_pl(&cls(-c, c), 0.5 * c, 1.2 / c).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(scaled.status, SdpStatus::Optimal);
        assert!(
            (scaled.objective - base.objective).abs() <= 1e-7,
            "c = {c}: {} vs {}",
            scaled.objective,
            base.objective
        );
    }
}

#[test]
fn scale_covariance_of_qgg_problem() {
    let base = solve(&build_pep_qgg(1.0, 0.6).unwrap(), &SolveOptions::default()).unwrap();
    for &c in &[0.5, 2.0] {
        let scaled = solve(&build_pep_qgg(c, 0.6 * c).unwrap(), &SolveOptions::default()).unwrap();
        assert!(
            (scaled.objective - base.objective).abs() <= 1e-7,
            "c = {c}: {} vs {}",
            scaled.objective,
            base.objective
        );
    }
}

/// A genuine one-step run of the extremal quadratic is feasible, so the
/// optimum is bounded below by its ratio, in particular non-negative.
#[test]
fn optimum_at_least_quadratic_run_ratio() {
    for &(mu, l, mu_p, t) in &[
        (-1.0, 1.0, 0.5, 1.0),
        (-1.0, 1.0, 0.3, 0.6),
        (-2.0, 1.0, 0.8, 1.5),
    ] {
        let sol = solve(
            &build_pep_pl(&cls(mu, l), mu_p, t).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let run_ratio = (1.0 - t * l) * (1.0 - t * l);
        assert!(
            sol.objective >= run_ratio - 1e-7,
            "optimum {} below witness {run_ratio}",
            sol.objective
        );
        assert!(sol.objective >= -1e-9);
    }
}

/// Primal objective never exceeds the dual objective beyond the gap
/// tolerance on optimal solves.
#[test]
fn self_duality_on_optimal_solves() {
    for &mu_g in &[0.2, 0.5, 0.9] {
        let prob = build_pep_qgg(1.0, mu_g).unwrap();
        let sol = solve(&prob, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        let dual_obj = -prob
            .constraints
            .iter()
            .zip(sol.duals.iter())
            .map(|(c, l)| c.d * l)
            .sum::<f64>();
        assert!(
            sol.objective <= dual_obj + 1e-7 * (1.0 + sol.objective.abs()),
            "primal {} above dual {dual_obj}",
            sol.objective
        );
    }
}

/// Solver tolerances are honored: loosening them still returns a valid
/// bound, tightening the cap surfaces MaxIter instead of a wrong answer.
#[test]
fn iteration_cap_yields_best_iterate() {
    let prob = build_pep_pl(&cls(-1.0, 1.0), 0.5, 1.0).unwrap();
    let sol = solve(
        &prob,
        &SolveOptions {
            max_iter: 4,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(sol.status, SdpStatus::MaxIter);
    assert!(sol.objective.is_finite());
}
