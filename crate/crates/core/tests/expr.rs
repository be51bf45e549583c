use brinkmann::expr::{Expression, Func};
use brinkmann::parse;
use proptest::prelude::*;

// Expressions in x, y that are finite and smooth on [-1, 1]².
fn arb_expr() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        Just(Expression::var("x")),
        Just(Expression::var("y")),
        (-3.0f64..3.0).prop_map(|c| Expression::constant((c * 8.0).round() / 8.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| {
                let den = Expression::add(Expression::constant(2.0), Expression::powi(b, 2));
                Expression::div(a, den)
            }),
            (inner.clone(), 2i32..4).prop_map(|(a, n)| Expression::powi(a, n)),
            inner.clone().prop_map(Expression::neg),
            inner.clone().prop_map(|a| Expression::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expression::call(Func::Cos, a)),
            inner.clone().prop_map(|a| Expression::call(Func::Exp, Expression::call(Func::Sin, a))),
            inner.prop_map(|a| {
                let arg = Expression::add(Expression::constant(1.5), Expression::call(Func::Cos, a));
                Expression::call(Func::Sqrt, arg)
            }),
        ]
    })
}

fn eval(e: &Expression, x: f64, y: f64) -> f64 {
    e.compile(&["x", "y"]).unwrap().eval(&[x, y]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(e in arb_expr(), pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 100)) {
        let back = parse(&e.to_string()).unwrap();
        for (x, y) in pts {
            let a = eval(&e, x, y);
            let b = eval(&back, x, y);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let h = 1e-4;
        for (var, dx, dy) in [("x", h, 0.0), ("y", 0.0, h)] {
            let d = eval(&e.differentiate(var), x, y);
            let fd = (eval(&e, x + dx, y + dy) - eval(&e, x - dx, y - dy)) / (2.0 * h);
            let scale: f64 = [eval(&e, x, y), d, 1.0].iter().map(|v| v.abs()).sum();
            prop_assert!((d - fd).abs() <= 1e3 * scale * h * h, "{e} d/d{var}: {d} vs {fd}");
        }
    }

    #[test]
    fn derivative_is_linear(a in arb_expr(), b in arb_expr(), k in -4.0f64..4.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let combo = Expression::add(Expression::scale(k, a.clone()), b.clone());
        let lhs = eval(&combo.differentiate("x"), x, y);
        let rhs = k * eval(&a.differentiate("x"), x, y) + eval(&b.differentiate("x"), x, y);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn parse_errors_are_positioned() {
    let e = parse("sin(x) + * y").unwrap_err();
    assert!(e.to_string().contains("offset 9"), "{e}");
    assert!(parse("u*(x^2 - y^2)").is_ok());
}
