use stationary_fermat_web::{cone_json, solve_json, sweep_json, ConeReply, SolveReply, SweepPoint};

#[test]
fn flat_solve_is_the_straight_line() {
    let out = solve_json(r#"{"model": "flat", "p": [0, 0], "q": [3, 4]}"#).unwrap();
    let r: SolveReply = serde_json::from_str(&out).unwrap();
    assert!(r.converged);
    assert!((r.t_plus - 5.0).abs() < 1e-9);
    assert_eq!(r.xy.len(), 65);
    assert_eq!(r.xy[64], [3.0, 4.0]);
    assert!((r.t[64] - 5.0).abs() < 1e-9);
}

#[test]
fn cylinder_windings_are_unwrapped() {
    let out = solve_json(r#"{"model": "cylinder(1)", "p": [0, 0], "q": [1, 1], "winding": 1}"#).unwrap();
    let r: SolveReply = serde_json::from_str(&out).unwrap();
    let want = (1.0 + (1.0 + std::f64::consts::TAU).powi(2)).sqrt();
    assert!((r.t_plus - want).abs() < 1e-6);
    assert!((r.xy.last().unwrap()[1] - (1.0 + std::f64::consts::TAU)).abs() < 1e-9);
}

#[test]
fn flat_cone_is_the_unit_circle() {
    let r: ConeReply = serde_json::from_str(&cone_json(r#"{"model": "flat", "at": [0, 0], "samples": 12}"#).unwrap()).unwrap();
    assert_eq!(r.curve.len(), 13);
    for [x, y] in r.curve {
        assert!((x.hypot(y) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn drift_shifts_the_cone() {
    let r: ConeReply =
        serde_json::from_str(&cone_json(r#"{"model": "randers-const(0.5, 0)", "at": [0, 0], "samples": 4}"#).unwrap())
            .unwrap();
    // speeds along and against the drift are the reciprocal arrival times
    let along = r.curve[0][0];
    let against = -r.curve[2][0];
    assert!((1.0 / along - 0.5 * (1.0 + 5f64.sqrt())).abs() < 1e-12);
    assert!((1.0 / against - 0.5 * (5f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn sweep_matches_closed_form() {
    let out = sweep_json(r#"{"model": "flat", "p": [0, 0], "q": [3, 4], "kappas": [0, -0.5, 1]}"#).unwrap();
    let pts: Vec<SweepPoint> = serde_json::from_str(&out).unwrap();
    assert!((pts[0].t_plus.unwrap() - 5.0).abs() < 1e-9);
    assert!((pts[1].t_plus.unwrap() - 26f64.sqrt()).abs() < 1e-9);
    assert!(pts[2].t_plus.is_none());
    assert!(!pts[2].admissible && pts[1].admissible);
}

#[test]
fn bad_requests_are_reported() {
    assert!(solve_json("{").is_err());
    assert!(solve_json(r#"{"model": "flat(3)", "p": [0, 0], "q": [1, 1]}"#).is_err());
    assert!(solve_json(r#"{"model": "flat", "p": [0, 0], "q": [1, 1], "extra": 1}"#).is_err());
    assert!(cone_json(r#"{"model": "nope", "at": [0, 0]}"#).is_err());
    let hot = solve_json(r#"{"model": "flat", "p": [0, 0], "q": [1, 1], "kappa": 0.1}"#).unwrap_err();
    assert!(hot.contains("admissible"), "{hot}");
}
