use brinkmann::geodesics::{
    classify_h, classify_pp, integrate_geodesic, transversal_integrability, ClassKind, ExitReason, GeodesicState,
    IntegratorOptions,
};
use brinkmann::normalize::to_pp_wave;
use brinkmann::parse;
use brinkmann::tensor::{BrinkmannMetric, DomainBox, GridSpec, V};

fn wide() -> DomainBox {
    DomainBox::new([-1e3, 1e3], [-1e3, 1e3], [-1e3, 1e3])
}

fn cahen_wallach() -> BrinkmannMetric {
    BrinkmannMetric::from_strs("(x^2 - y^2)/2", "0", "0", wide()).unwrap()
}

#[test]
fn cahen_wallach_closed_form() {
    let big = DomainBox::new([-1e6, 1e6], [-1e6, 1e6], [-1e6, 1e6]);
    let m = BrinkmannMetric::from_strs("(x^2 - y^2)/2", "0", "0", big).unwrap();
    let (x0, y0, dx0, dy0) = (0.3, -0.7, -0.2, 0.5);
    let t = integrate_geodesic(
        &m,
        GeodesicState::new([0.0, 0.0, x0, y0], [1.0, 0.1, dx0, dy0]),
        10.0,
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert!(t.completed);
    let l = t.last();
    assert_eq!(l.s, 10.0);
    let s: f64 = 10.0;
    let x = x0 * s.cosh() + dx0 * s.sinh();
    let y = y0 * s.cos() + dy0 * s.sin();
    assert!((l.x[2] - x).abs() < 1e-6, "x: {} vs {x}", l.x[2]);
    assert!((l.x[3] - y).abs() < 1e-6, "y: {} vs {y}", l.x[3]);
    assert!((l.dx[2] - (x0 * s.sinh() + dx0 * s.cosh())).abs() < 1e-6);
    assert!((l.dx[3] - (-y0 * s.sin() + dy0 * s.cos())).abs() < 1e-6);
}

// Initial data whose solutions stay bounded or grow at most linearly.
fn bounded_corpus() -> Vec<(&'static str, BrinkmannMetric, [f64; 4], [f64; 4])> {
    let d = wide();
    vec![
        ("minkowski", BrinkmannMetric::minkowski(d), [0.0, 0.0, 0.1, 0.2], [1.0, -0.3, 0.4, 0.1]),
        ("cahen-wallach", cahen_wallach(), [0.0, 0.0, 0.0, 0.8], [1.0, 0.2, 0.0, -0.3]),
        (
            "cahen-wallach timelike",
            cahen_wallach(),
            [0.0, 0.0, 0.0, 0.0],
            [1.0, -0.5, 0.0, 0.0],
        ),
        (
            "rotating frame",
            BrinkmannMetric::from_strs("(x^2 + y^2)/2", "y", "-x", d).unwrap(),
            [0.0, 0.0, 0.5, 0.0],
            [0.02, 0.1, 0.01, 0.0],
        ),
        (
            "null plane wave",
            BrinkmannMetric::from_strs("-(x^2 + y^2)", "0", "0", d).unwrap(),
            [0.0, 0.0, 1.0, -1.0],
            [0.5, 0.0, 0.3, 0.0],
        ),
    ]
}

#[test]
fn norm_is_conserved_to_s_50() {
    for (name, m, x0, dx0) in bounded_corpus() {
        let t = integrate_geodesic(&m, GeodesicState::new(x0, dx0), 50.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(t.exit, ExitReason::Completed, "{name}");
        let g0 = t.norms[0];
        assert!(t.max_drift <= 1e-8 * (1.0 + g0.abs()), "{name}: drift {}", t.max_drift);
    }
}

#[test]
fn null_direction_first_integrals() {
    for (name, m, x0, dx0) in bounded_corpus() {
        let t = integrate_geodesic(&m, GeodesicState::new(x0, dx0), 50.0, &IntegratorOptions::default()).unwrap();
        let dv = {
            let mut e = [0.0; 4];
            e[V] = 1.0;
            e
        };
        for s in &t.states {
            assert!((s.dx[0] - dx0[0]).abs() <= 1e-8, "{name}: u' drift at s={}", s.s);
            let g = m.inner(&s.x, &s.dx, &dv).unwrap();
            assert!((g - dx0[0]).abs() <= 1e-8, "{name}: g(x', dv) at s={}", s.s);
        }
    }
}

#[test]
fn superquadratic_profile_escapes() {
    let big = 1e15;
    let m = BrinkmannMetric::from_strs("x^4", "0", "0", DomainBox::new([-big, big], [-big, big], [-big, big])).unwrap();
    let t = integrate_geodesic(
        &m,
        GeodesicState::new([0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]),
        100.0,
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert!(!t.completed);
    assert!(t.last().s < 100.0);
    // Quadratic growth along the same data stays complete.
    let q = BrinkmannMetric::from_strs("-(x^2)", "0", "0", wide()).unwrap();
    let t = integrate_geodesic(
        &q,
        GeodesicState::new([0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]),
        100.0,
        &IntegratorOptions::default(),
    )
    .unwrap();
    assert!(t.completed);
}

#[test]
fn normalized_autonomous_input_is_cahen_wallach() {
    // H₀ = 1.5x² + xy − 1.5y², 2A = [[3, 1], [1, −3]], λ = ±√10; Ω = d(xy + sin x).
    let d = DomainBox::new([-1.0, 1.0], [-1.5, 1.5], [-1.5, 1.5]);
    let m = BrinkmannMetric::from_strs("1.5*x^2 + x*y - 1.5*y^2", "y + cos(x)", "x", d).unwrap();
    let form = to_pp_wave(&m, &GridSpec::default()).unwrap();
    let c = classify_pp(&form, 1e-8).unwrap();
    assert_eq!(c.kind, ClassKind::CahenWallach);
    let l = c.eigenvalues.unwrap();
    let r = 10f64.sqrt();
    assert!((l[0] - r).abs() < 1e-8 && (l[1] + r).abs() < 1e-8, "{l:?}");
}

#[test]
fn classification_corpus() {
    let d = DomainBox::default();
    let cases = [
        ("(x^2 - y^2)/2", ClassKind::CahenWallach, Some([1.0, -1.0])),
        ("x^2 - y^2", ClassKind::CahenWallach, Some([2.0, -2.0])),
        ("u*(x^2 - y^2)", ClassKind::PlaneWave, None),
        ("sin(u)*x*y + x", ClassKind::PlaneWave, None),
        ("x^3 - 3*x*y^2", ClassKind::GeneralPpWave, None),
        ("exp(x)*cos(y)", ClassKind::GeneralPpWave, None),
        ("x*y", ClassKind::CahenWallach, Some([1.0, -1.0])),
        ("y^2", ClassKind::PlaneWave, None),
    ];
    for (h, kind, eig) in cases {
        let c = classify_h(&parse(h).unwrap(), &d, 1e-8).unwrap();
        assert_eq!(c.kind, kind, "{h}");
        match (c.eigenvalues, eig) {
            (Some(a), Some(b)) => assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12, "{h}: {a:?}"),
            (a, b) => assert_eq!(a.is_some(), b.is_some(), "{h}"),
        }
    }
}

#[test]
fn integrability_matches_closedness() {
    let d = DomainBox::default();
    let g = GridSpec::default();
    let cases = [
        ("0", "0", "0", 0.0),
        ("x^2 - y^2", "y", "x", 0.0),
        ("(x^2 + y^2)/2", "y", "-x", 1.0),
        ("x^2", "2*y", "0", 1.0),
        ("0", "-y", "x", -1.0),
        ("x*y", "0.5*y + cos(x)", "-0.5*x", 0.5),
    ];
    for (h, o1, o2, alpha) in cases {
        let m = BrinkmannMetric::from_strs(h, o1, o2, d).unwrap();
        let r = transversal_integrability(&m, &g).unwrap();
        assert!((r.alpha - alpha).abs() < 1e-12, "{h} {o1} {o2}: {}", r.alpha);
        assert_eq!(r.integrable, alpha == 0.0);
        assert!((r.closedness_defect - 2.0 * alpha.abs()).abs() < 1e-10);
    }
}
