use brinkmann::normalize::{
    extract_alpha, potential_f, rotation, symbolic_harmonic_defect, to_pp_wave, AlphaProfile,
};
use brinkmann::tensor::{BrinkmannMetric, DomainBox, GridSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dom() -> DomainBox {
    DomainBox::new([-1.0, 1.0], [-1.5, 1.5], [-1.5, 1.5])
}

const ROT_X: &str = "(cos(u)*x + sin(u)*y)";
const ROT_Y: &str = "(-sin(u)*x + cos(u)*y)";

fn h0(x: f64, y: f64) -> f64 {
    x.powi(3) - 3.0 * x * y * y
}

/// pp-wave `H₀ = X³ − 3XY²` dressed with `f = uxy`, `α = 1`.
fn manufactured() -> BrinkmannMetric {
    let h = format!("{ROT_X}^3 - 3*{ROT_X}*{ROT_Y}^2 + x*y + (x^2 + y^2)/2");
    BrinkmannMetric::from_strs(&h, "u*y + y", "u*x - x", dom()).unwrap()
}

#[test]
fn round_trip_recovers_profile() {
    let m = manufactured();
    let grid = GridSpec::new(5, 9, 9);
    let form = to_pp_wave(&m, &grid).unwrap();
    assert_eq!(form.alpha.at(0.3).unwrap(), 1.0);
    assert_eq!(form.alpha.variation(m.domain().u, 9).unwrap(), 0.0);
    let mut worst: f64 = 0.0;
    for p in grid.points(m.domain()) {
        let (u, x, y) = (p[0], p[2], p[3]);
        assert!((form.potential.value(u, x, y).unwrap() - u * x * y).abs() < 1e-12);
        let (s, c) = u.sin_cos();
        let (xx, yy) = (c * x + s * y, -s * x + c * y);
        worst = worst.max((form.h_tilde(u, xx, yy).unwrap() - h0(xx, yy)).abs());
    }
    assert!(worst < 1e-8, "{worst}");
    assert!(form.pipeline_residual(&m, &grid).unwrap() < 1e-8);
    assert!(symbolic_harmonic_defect(&m, &form.alpha, &grid).unwrap() < 1e-12);
}

/// Pullback of `dX² + dY²` under the rotation, as a quadratic form on `(du, dx, dy)`.
fn rotated_form(alpha: f64, beta: f64, x: f64, y: f64, w: [f64; 3]) -> f64 {
    let (s, c) = beta.sin_cos();
    // β' = α, so dX = αY du + c dx + s dy and dY = −αX du − s dx + c dy.
    let xx = c * x + s * y;
    let yy = -s * x + c * y;
    let dx = alpha * yy * w[0] + c * w[1] + s * w[2];
    let dy = -alpha * xx * w[0] - s * w[1] + c * w[2];
    dx * dx + dy * dy
}

#[test]
fn rotation_isometry_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for alpha_profile in [AlphaProfile::constant(1.0), AlphaProfile::constant(-0.35)] {
        let rot = rotation(&alpha_profile);
        for _ in 0..100 {
            let u: f64 = rng.gen_range(-1.0..1.0);
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(-2.0..2.0);
            let w: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let a = rot.alpha(u).unwrap();
            let lhs = rotated_form(a, rot.beta(u).unwrap(), x, y, w);
            let rhs = w[1] * w[1] + w[2] * w[2]
                + a * a * (x * x + y * y) * w[0] * w[0]
                + 2.0 * a * w[0] * (y * w[1] - x * w[2]);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn beta_by_quadrature_matches_closed_form() {
    let m = BrinkmannMetric::from_strs("0", "u*y", "-u*x", dom()).unwrap();
    let a = extract_alpha(&m, &GridSpec::default()).unwrap();
    let rot = rotation(&a);
    for u in [-0.9, -0.2, 0.0, 0.4, 1.0] {
        assert!((rot.beta(u).unwrap() - u * u / 2.0).abs() < 1e-12);
    }
}

#[test]
fn autonomous_input_exposes_h_hat() {
    let m = BrinkmannMetric::from_strs("(x^2 + y^2)/2 + x^3 - 3*x*y^2", "y", "-x", dom()).unwrap();
    let grid = GridSpec::default();
    let form = to_pp_wave(&m, &grid).unwrap();
    assert!(form.alpha.variation(m.domain().u, 9).unwrap() <= 1e-5);
    let hat = form.h_hat.clone().unwrap();
    let hat = hat.compile(&["x", "y"]).unwrap();
    for p in grid.points(m.domain()) {
        let [uu, xx, yy] = form.rotation.forward(p[0], p[2], p[3]).unwrap();
        let lhs = form.h_tilde(uu, xx, yy).unwrap();
        assert!((lhs - hat.eval(&[p[2], p[3]]).unwrap()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn potential_is_path_independent(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
        u in -1.0f64..1.0, x in -1.4f64..1.4, y in -1.4f64..1.4,
    ) {
        // Ω = d(a x²y + b sin(x) y + c u y³) + (y, −x)
        let o1 = format!("{a}*2*x*y + {b}*cos(x)*y + y");
        let o2 = format!("{a}*x^2 + {b}*sin(x) + {c}*3*u*y^2 - x");
        let m = BrinkmannMetric::from_strs("0", &o1, &o2, dom()).unwrap();
        let g = GridSpec::default();
        let al = extract_alpha(&m, &g).unwrap();
        let f = potential_f(&m, &al, [0.0, 0.0], &g).unwrap();
        let v1 = f.value(u, x, y).unwrap();
        let v2 = f.value_reversed(u, x, y).unwrap();
        let exact = a * x * x * y + b * x.sin() * y + c * u * y.powi(3);
        prop_assert!((v1 - v2).abs() < 1e-9);
        prop_assert!((v1 - exact).abs() < 1e-9);
        prop_assert!(f.exactness_defect(m.domain(), &g).unwrap() < 1e-9);
    }

    #[test]
    fn pp_wave_input_is_idempotent(a in -2.0f64..2.0, b in -2.0f64..2.0, u0 in -1.0f64..1.0) {
        let h = format!("{a}*(x^2 - y^2) + {b}*x*y + u*x");
        let m = BrinkmannMetric::from_strs(&h, "0", "0", dom()).unwrap();
        let form = to_pp_wave(&m, &GridSpec::default()).unwrap();
        for (x, y) in [(0.3, -0.2), (1.1, 0.9)] {
            let exact = a * (x * x - y * y) + b * x * y + u0 * x;
            prop_assert!((form.h_tilde(u0, x, y).unwrap() - exact).abs() < 1e-10);
        }
    }
}
