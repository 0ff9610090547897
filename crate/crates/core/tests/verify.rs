use pdm_core::coord::CoordinateMap;
use pdm_core::expr::Params;
use pdm_core::func::Interval;
use pdm_core::operators::{oscillator_potential, OrderingParams, OscillatorConfig};
use pdm_core::profiles::{builtin, MassProfile};
use pdm_core::verify::{
    check_canonical, check_factorization, check_h1_h2_agreement, check_hamiltonian_commutators,
    check_hamiltonian_commutators_unscaled, check_isospectral, check_ladder_commutator, check_similarity,
    format_table, run_suite, ResidualReport, Status, Suite, GRID_SIZES,
};

fn profile(name: &str, kv: &[(&str, f64)], lo: f64, hi: f64) -> (MassProfile<f64>, CoordinateMap<f64>) {
    let p: Params = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let mass = builtin::<f64>(name, &p).unwrap().mass.with_window(Interval::new(lo, hi)).unwrap();
    let map = CoordinateMap::build_default(&mass).unwrap();
    (mass, map)
}

fn cfg(omega: f64, lo: f64, hi: f64) -> OscillatorConfig<f64> {
    OscillatorConfig::new(omega, lo, hi, GRID_SIZES[0]).unwrap()
}

fn second_order(r: &ResidualReport) {
    let o = r.estimated_order.unwrap_or_else(|| panic!("no order: {r:?}"));
    assert!((1.8..2.3).contains(&o), "{r:?}");
    assert_eq!(r.status(), Status::Pass, "{r:?}");
}

#[test]
fn canonical_commutator_is_exact() {
    for (name, kv, lo, hi) in [
        ("constant", vec![], -10.0, 10.0),
        ("rational_cubic", vec![("lambda", 1.0)], -3.0, 3.0),
        ("power_law", vec![("lambda", 1.0), ("sigma", 2.0)], 0.5, 5.0),
    ] {
        let (m, _) = profile(name, &kv, lo, hi);
        let r = check_canonical(&m, &cfg(1.0, lo, hi), &[500]).unwrap();
        assert!(r.residuals[0] <= 1e-12, "{name}: {r:?}");
        assert!(r.passed);
    }
}

#[test]
fn ladder_commutator() {
    let (m, map) = profile("constant", &[], -10.0, 10.0);
    let r = check_ladder_commutator(&m, &map, &cfg(1.0, -10.0, 10.0), &GRID_SIZES).unwrap();
    assert!(r.residuals.iter().all(|&x| x <= 1e-10), "{r:?}");
    assert!(r.passed);

    let (m, map) = profile("asinh_log", &[("alpha", 0.1)], -20.0, 20.0);
    let c = cfg(1.0, -20.0, 20.0);
    second_order(&check_ladder_commutator(&m, &map, &c, &GRID_SIZES).unwrap());

    // the ordering the commutator rules out leaves a finite defect
    let wrong = c.with_ordering(OrderingParams::new(0.0, -0.5).unwrap());
    let r = check_ladder_commutator(&m, &map, &wrong, &GRID_SIZES).unwrap();
    assert_eq!(r.status(), Status::Fail, "{r:?}");
    assert!(r.check_name.contains("a=0"));
    assert!(r.estimated_order.unwrap().abs() < 0.1);
    for &x in &r.residuals {
        // sup of u u''/(2ω) with u = m^{-1/2} is α²/2
        assert!((x - 0.005).abs() < 1e-4, "{x}");
    }
}

#[test]
fn factorization() {
    let (m, map) = profile("constant", &[], -10.0, 10.0);
    let r = check_factorization(&m, &map, &cfg(1.0, -10.0, 10.0), &GRID_SIZES).unwrap();
    assert!(r.residuals.iter().all(|&x| x <= 1e-10), "{r:?}");

    let (m, map) = profile("asinh_log", &[("alpha", 0.1)], -20.0, 20.0);
    for omega in [1.0, 3.0] {
        second_order(&check_factorization(&m, &map, &cfg(omega, -20.0, 20.0), &GRID_SIZES).unwrap());
    }
}

#[test]
fn similarity() {
    let (m, map) = profile("constant", &[], -10.0, 10.0);
    let v = oscillator_potential(&map, 1.0);
    let r = check_similarity(&m, &cfg(1.0, -10.0, 10.0), v.as_ref(), &GRID_SIZES).unwrap();
    assert!(r.residuals.iter().all(|&x| x <= 1e-10), "{r:?}");

    for (name, kv, lo, hi) in [
        ("rational_cubic", vec![("lambda", 0.01)], -20.0, 20.0),
        ("morse", vec![("lambda", -1.0), ("beta", 1.0)], 0.8, 6.0),
    ] {
        let (m, map) = profile(name, &kv, lo, hi);
        let v = oscillator_potential(&map, 1.0);
        second_order(&check_similarity(&m, &cfg(1.0, lo, hi), v.as_ref(), &GRID_SIZES).unwrap());
    }
}

#[test]
fn isospectral() {
    let (m, map) = profile("constant", &[], -20.0, 20.0);
    let r = check_isospectral(&m, &map, &cfg(1.0, -20.0, 20.0), &[2000, 4000]).unwrap();
    assert_eq!(r.status(), Status::Pass);
    // level 5 carries the largest stencil shift, 61 h²/32
    assert!(r.final_residual() <= 2e-4, "{r:?}");

    let (m, map) = profile("asinh_log", &[("alpha", 0.1)], -20.0, 20.0);
    let c = cfg(1.0, -20.0, 20.0);
    let r = check_isospectral(&m, &map, &c, &[2000, 4000]).unwrap();
    assert!(r.passed && r.final_residual() <= 1e-3, "{r:?}");
    let r = check_h1_h2_agreement(&m, &map, &c, &[2000, 4000]).unwrap();
    assert!(r.passed && r.final_residual() <= 2e-3, "{r:?}");

    let (m, map) = profile("rational_cubic", &[("lambda", 1.0)], -20.0, 20.0);
    for r in run_suite(Suite::Isospectral, &m, &map, &cfg(1.0, -20.0, 20.0), &[500, 1000]).unwrap() {
        assert_eq!(r.status(), Status::Skipped, "{r:?}");
        assert!(r.note.as_deref().unwrap().contains("bounded"));
        assert!(!r.passed);
    }
}

#[test]
fn narrow_grid_cannot_pass_isospectral() {
    let (m, map) = profile("constant", &[], -3.0, 3.0);
    let r = check_isospectral(&m, &map, &cfg(1.0, -3.0, 3.0), &[500, 1000]).unwrap();
    assert_eq!(r.status(), Status::Fail);
    assert!(r.note.unwrap().contains("ground-state widths"));
}

#[test]
fn hamiltonian_commutators() {
    let (m, map) = profile("constant", &[], -10.0, 10.0);
    let r = check_hamiltonian_commutators(&m, &map, &cfg(1.0, -10.0, 10.0), &GRID_SIZES).unwrap();
    assert!(r.residuals.iter().all(|&x| x <= 1e-8), "{r:?}");
    // exact up to cancellation in entries of size h⁻³
    assert_eq!(r.status(), Status::Pass, "{r:?}");
    assert!(r.estimated_order.is_none());

    let (m, map) = profile("asinh_log", &[("alpha", 0.1)], -20.0, 20.0);
    second_order(&check_hamiltonian_commutators(&m, &map, &cfg(1.0, -20.0, 20.0), &GRID_SIZES).unwrap());

    let c = cfg(2.0, -20.0, 20.0);
    second_order(&check_hamiltonian_commutators(&m, &map, &c, &GRID_SIZES).unwrap());
    let r = check_hamiltonian_commutators_unscaled(&m, &map, &c, &GRID_SIZES).unwrap();
    assert_eq!(r.status(), Status::Fail);
    assert!(r.final_residual() > 1.0);
    assert!(r.estimated_order.unwrap() < 0.5, "{r:?}");
}

#[test]
fn full_suite_on_asinh_log() {
    let (m, map) = profile("asinh_log", &[("alpha", 0.1)], -20.0, 20.0);
    let reports = run_suite(Suite::All, &m, &map, &cfg(1.0, -20.0, 20.0), &GRID_SIZES).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.check_name.as_str()).collect();
    assert_eq!(
        names,
        [
            "canonical",
            "ladder_commutator",
            "factorization",
            "similarity",
            "isospectral",
            "h1_h2_agreement",
            "hamiltonian_commutators"
        ]
    );
    for r in &reports {
        assert_eq!(r.status(), Status::Pass, "{r:?}");
        assert_eq!(r.grid_sizes.len(), r.residuals.len());
    }
    let table = format_table(&reports);
    assert_eq!(table.lines().count(), reports.len() + 1);
}

#[test]
fn reports_serialize_with_their_fields() {
    let (m, _) = profile("constant", &[], -10.0, 10.0);
    let r = check_canonical(&m, &cfg(1.0, -10.0, 10.0), &[500, 1000]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["check_name", "grid_sizes", "residuals", "estimated_order", "passed", "threshold", "skipped"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["grid_sizes"], serde_json::json!([500, 1000]));
    assert_eq!(serde_json::to_value(Status::Skipped).unwrap(), "SKIPPED");
}

#[test]
fn suite_names_round_trip() {
    for name in Suite::NAMES {
        assert!(Suite::parse(name).is_some());
    }
    assert_eq!(Suite::parse("hamiltonian-commutators"), Some(Suite::HamiltonianCommutators));
    assert_eq!(Suite::parse("everything"), None);
}
