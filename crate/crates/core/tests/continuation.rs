mod common;

use horograph::estimates::check_length_bounds;
use horograph::geometry::compute_quantities;
use horograph::solver::{eps_descent, Warning};

#[test]
fn suite_reaches_the_degenerate_limit() {
    for case in common::suite(16) {
        let r = common::run(&case);
        assert_eq!(r.final_eps(), 0.0, "{}", case.name);
        assert!(
            !r.warnings.iter().any(|w| matches!(w, Warning::DegenerateLimit { .. })),
            "{}",
            case.name
        );
        assert_eq!(r.steps.len(), r.fields.len());
    }
}

#[test]
fn every_field_respects_the_length_bounds() {
    for case in common::suite(16) {
        let r = common::run(&case);
        for (step, field) in r.steps.iter().zip(&r.fields) {
            let q = compute_quantities(field.domain(), field.boundary()).unwrap();
            let rep = check_length_bounds(field, &q);
            assert!(rep.upper_ok, "{} at s = {}, eps = {}", case.name, step.s, step.eps);
            if step.s > 0.5 {
                assert!(rep.pass, "{} at s = {}, eps = {}", case.name, step.s, step.eps);
            } else {
                assert!(rep.observed_min >= q.min_f);
            }
        }
    }
}

#[test]
fn schedule_is_followed_in_order() {
    let case = common::constant_case("width 1", 1.0, 12);
    let r = common::run(&case);
    let s_part: Vec<f64> = r.steps.iter().take(11).map(|s| s.s).collect();
    assert_eq!(s_part[0], 0.5);
    assert!(s_part.windows(2).all(|w| w[1] > w[0]));
    assert!(r.steps.iter().take(11).all(|s| s.eps == 1.0));
    let eps_part: Vec<f64> = r.steps.iter().skip(11).map(|s| s.eps).collect();
    assert_eq!(eps_part, eps_descent(0.0)[1..].to_vec());
    assert!(r.steps.iter().skip(10).all(|s| s.s == 1.0));
}

#[test]
fn warm_starts_keep_iteration_counts_steady() {
    for case in common::suite(16) {
        let r = common::run(&case);
        assert!(
            !r.warnings.iter().any(|w| matches!(w, Warning::IterationJump { .. })),
            "{}: {:?}",
            case.name,
            r.warnings
        );
    }
}

#[test]
fn geodesic_plane_is_recovered() {
    let case = &common::suite(32)[3];
    let r = common::run(case);
    let oracle = case.oracle.as_ref().unwrap();
    let err = r
        .final_field()
        .max_error_against(|x, t| oracle.value(&[x, t]).unwrap());
    assert!(err < 1e-3, "error {err}");
}

#[test]
fn eps_gaps_contract() {
    let r = common::run(&common::constant_case("width 0.5", 0.5, 16));
    assert!(r.gaps_decrease_below(1e-3));
    let last = r.eps_gaps.last().unwrap();
    assert_eq!(last.1, 0.0);
    assert!(last.2 < 1e-6);
}

#[test]
fn hypothesis_warning_for_wide_x_sinh_t_data() {
    let case = &common::suite(12)[4];
    let r = common::run(case);
    assert!(matches!(r.warnings[0], Warning::ExistenceHypothesis { .. }));
}
