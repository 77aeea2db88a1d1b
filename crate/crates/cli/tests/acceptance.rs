//! One line per acceptance criterion; the test fails if any criterion does.

use tfv_cli::config::RunConfig;
use tfv_cli::suite::{self, criterion, TITLES};

/// Tolerances are pinned here so that loosening one in the suite is caught.
#[test]
fn tolerances_are_pinned() {
    assert_eq!(suite::SPACE_FORM_DIMS, [2, 3, 5]);
    assert_eq!((suite::SPACE_FORM_POINTS, suite::SPACE_FORM_TOL), (100, 1e-7));
    assert_eq!(tfv_cli::commands::PLANES_PER_POINT, 3);
    assert_eq!(suite::EXAMPLE_POINTS, 200);
    assert_eq!((suite::UHS_F_TOL, suite::UHS_FRAME_TOL), (1e-8, 1e-9));
    assert_eq!((suite::TORQUED_F_TOL, suite::TORQUED_ORTHOGONALITY_TOL), (1e-7, 1e-9));
    assert_eq!((suite::ANTI_F_TOL, suite::ANTI_RECONSTRUCTION_TOL), (1e-7, 1e-8));
    assert_eq!(suite::LENGTH_SPREAD_MIN, 0.1);
    assert_eq!((suite::GEODESIC_TOL, suite::UNIT_TOL, suite::GENERATIVE_TOL), (1e-9, 1e-10, 1e-8));
    assert_eq!(suite::OBSTRUCTION_POINTS, 100);
    assert_eq!(
        (suite::IDENTITY_TOL, suite::TORQUED_CLOSEDNESS_TOL, suite::TORQUED_GRADIENT_TOL),
        (1e-7, 1e-9, 1e-6)
    );
    assert_eq!(suite::ANTI_OBSTRUCTION_TOL, 1e-10);
    assert_eq!((suite::FLOW_T_MAX, suite::FLOW_STEP, suite::FLOW_LINEARITY_TOL), (0.5, 1e-3, 1e-6));
    assert_eq!(suite::CONVERGENCE_RATIO, (8.0, 32.0));
    assert_eq!((suite::ORACLE_POINTS, suite::ORACLE_TOL), (100, 1e-6));
    assert_eq!(suite::REJECTION_MIN, 0.1);
}

#[test]
fn acceptance_criteria() {
    let cfg = RunConfig::default();
    let mut failed = Vec::new();
    for k in 1..=TITLES.len() {
        let c = criterion(k, &cfg);
        println!("{}", c.line());
        for check in &c.checks {
            println!("    {} residual={:.3e} tolerance={:.1e} as_expected={}", check.id, check.max_residual, check.tolerance, check.as_expected);
        }
        if !c.passed() {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn verdicts_do_not_depend_on_seed() {
    let a = RunConfig::default();
    let b = RunConfig { seed: 7, ..RunConfig::default() };
    for k in 1..=TITLES.len() {
        let (ca, cb) = (criterion(k, &a), criterion(k, &b));
        let va: Vec<_> = ca.checks.iter().map(|c| (c.id.clone(), c.pass, c.as_expected)).collect();
        let vb: Vec<_> = cb.checks.iter().map(|c| (c.id.clone(), c.pass, c.as_expected)).collect();
        assert_eq!(va, vb, "criterion {k}");
    }
}

#[test]
fn tolerance_stress_reports_failures() {
    let cfg = RunConfig { tol: Some(1e-15), ..RunConfig::default() };
    let failing: Vec<_> = suite::run_all(&cfg).into_iter().filter(|c| !c.passed()).collect();
    assert!(!failing.is_empty());
    for c in failing {
        assert!(c.checks.iter().any(|k| !k.as_expected && k.max_residual.is_finite()), "{}", c.line());
    }
}
