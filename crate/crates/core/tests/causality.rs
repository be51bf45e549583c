use brinkmann::causality::{assemble_gamma, hhat_from_metric, violation_certificate, CausalityParams, Profile};
use brinkmann::tensor::{BrinkmannMetric, DomainBox, GridSpec};

fn check_certificate(h: &str, alpha: f64) {
    let hhat = Profile::parse(h).unwrap();
    let params = CausalityParams::new(alpha, 3.0, 1.0, 60);
    let c = violation_certificate(&hhat, &params).unwrap();
    let e0 = c.energy.e0;
    let tag = format!("{h} alpha={alpha}");

    assert!(c.samples.len() >= 1000);
    for s in &c.samples {
        assert!((s.g_dot_dot + e0).abs() <= 1e-8 * (1.0 + e0), "{tag} t={}", s.t);
    }
    assert_eq!([c.start.u, c.start.v, c.start.x, c.start.y], [0.0; 4]);
    assert_eq!([c.end.u, c.end.v, c.end.x, c.end.y], [1.0, 0.0, 0.0, 0.0]);
    assert!(c.excursion_norm > 3.0, "{tag}");
    assert!(c.ledger.rotation_slack >= 0.0, "{tag}: {}", c.ledger.rotation_slack);
    assert!(c.ledger.energy_slack >= 0.0, "{tag}");
    assert!(c.ledger.lemma_slack >= -1e-8, "{tag}");
    assert!(c.ledger.bound_slack > 0.0, "{tag}");
    if c.ledger.h1_lower_bound > 0.0 {
        assert!(c.ledger.h1 > 0.0);
    }
    assert!((c.energy.e0 - c.energy.e0_bisection).abs() < 1e-9 * (1.0 + e0));
    assert_eq!(c.attempts.last().unwrap().k, c.k0);
    assert!(c.attempts[..c.attempts.len() - 1].iter().all(|a| a.h0 <= 0.0));

    // Oracle: push Γ back to (u, v, x, y), where the metric is
    // 2du(dv + (Ĥ + α²|z|²/2) du + α(y dx − x dy)) + dx² + dy², and
    // evaluate g(γ̇, γ̇) with the general tensor code and finite differences.
    let (curve, _) = assemble_gamma(&hhat, &c.curve, alpha, 1.0, e0, 1001).unwrap();
    let r = 4.0 * c.radius;
    let m = BrinkmannMetric::from_strs(
        &format!("{h} + {}*(x^2 + y^2)", 0.5 * alpha * alpha),
        &format!("{alpha}*y"),
        &format!("-{alpha}*x"),
        DomainBox::new([-1.0, 2.0], [-r, r], [-r, r]),
    )
    .unwrap();
    let gamma = |t: f64| -> [f64; 4] {
        let s = curve.sample(t).unwrap();
        let (sn, cs) = (alpha * s.u).sin_cos();
        [s.u, curve.v.value(t).unwrap(), cs * s.x - sn * s.y, sn * s.x + cs * s.y]
    };
    let breaks = c.curve.breakpoints();
    let h = 1e-6;
    for i in 1..400 {
        let t = i as f64 / 400.0;
        if breaks.iter().any(|b| (b - t).abs() < 1e-4) {
            continue;
        }
        let (a, b) = (gamma(t + h), gamma(t - h));
        let dot: [f64; 4] = std::array::from_fn(|k| (a[k] - b[k]) / (2.0 * h));
        let g = m.inner(&gamma(t), &dot, &dot).unwrap();
        assert!((g + e0).abs() <= 1e-5 * (1.0 + e0), "{tag} t={t}: {g} vs {}", -e0);
    }
}

#[test]
fn exponential_profile_certificates() {
    for alpha in [0.0, 0.3, -0.5] {
        check_certificate("-(exp(x)*cos(y))", alpha);
    }
}

#[test]
fn rotated_exponential_certificate() {
    check_certificate("-(exp(y)*cos(x)) + x*y", 0.2);
}

#[test]
fn refusals() {
    let p = CausalityParams::new(0.0, 3.0, 1.0, 10);
    let e = violation_certificate(&Profile::parse("x^2 - y^2").unwrap(), &p).unwrap_err();
    assert_eq!(e.kind(), "no_witness");
    let e = violation_certificate(&Profile::parse("-(x^4)").unwrap(), &p).unwrap_err();
    assert_eq!(e.kind(), "not_harmonic");
    let e = violation_certificate(&Profile::parse("-(exp(x)*cos(y))").unwrap(), &CausalityParams::new(0.0, 3.0, 4.0, 10))
        .unwrap_err();
    assert_eq!(e.kind(), "invalid_input");
}

#[test]
fn profile_from_autonomous_metric() {
    let d = DomainBox::new([-1.0, 1.0], [-2.0, 2.0], [-2.0, 2.0]);
    // Ĥ = −eˣ cos y, α = 0.5 and an exact term d(xy).
    let m = BrinkmannMetric::from_strs("-(exp(x)*cos(y)) + 0.125*(x^2 + y^2)", "0.5*y + y", "-0.5*x + x", d).unwrap();
    let (p, alpha) = hhat_from_metric(&m, &GridSpec::default()).unwrap();
    assert!((alpha - 0.5).abs() < 1e-12);
    for (x, y) in [(0.0f64, 0.0f64), (1.0, -0.5), (-1.5, 1.2)] {
        assert!((p.at(x, y) + x.exp() * y.cos()).abs() < 1e-12);
    }
    let u = BrinkmannMetric::from_strs("u*x", "0", "0", d).unwrap();
    assert_eq!(hhat_from_metric(&u, &GridSpec::default()).unwrap_err().kind(), "non_autonomous");
}
