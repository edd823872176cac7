use std::collections::BTreeMap;

use proptest::prelude::*;

use hamiltonian_noether::expr::{
    evaluate, is_zero, partial_diff, simplify, total_derivative, EvaluationPoint, Expr, Func, Rational, Symbol,
    ZeroTest,
};
use hamiltonian_noether::numerics::compile;
use hamiltonian_noether::parser::{parse_expression, ParseContext};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::t()),
        (1usize..=2).prop_map(Expr::q),
        (1usize..=2).prop_map(Expr::p),
        (-9i64..=9, 1i64..=4).prop_map(|(a, b)| Expr::rational(a, b)),
    ]
}

fn exponent() -> impl Strategy<Value = Rational> {
    prop_oneof![
        (-3i64..=4).prop_map(|k| Rational::from_integer(k.into())),
        Just(Rational::new(1.into(), 2.into())),
        Just(Rational::new((-1).into(), 2.into())),
        Just(Rational::new(2.into(), 3.into())),
    ]
}

fn func() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Tan),
        Just(Func::Arctan),
        Just(Func::Exp),
        Just(Func::Log),
    ]
}

/// Random canonical expressions over `t, q1, q2, p1, p2`.
fn expression() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::product),
            (inner.clone(), exponent()).prop_map(|(b, r)| Expr::pow(b, r)),
            (func(), inner.clone()).prop_map(|(f, a)| Expr::apply(f, a)),
            inner.prop_map(|e| -e),
        ]
    })
}

/// Polynomial-like expressions without functions or fractional powers, so
/// evaluation is defined almost everywhere.
fn tame() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::product),
            (inner.clone(), 0u32..=3).prop_map(|(b, k)| b.powi(k as i64)),
            inner.clone().prop_map(|e| e.sin()),
        ]
    })
}

fn point(values: [f64; 5]) -> EvaluationPoint {
    EvaluationPoint::new()
        .with(Symbol::Time, values[0])
        .with(Symbol::Coord(1), values[1])
        .with(Symbol::Coord(2), values[2])
        .with(Symbol::Momentum(1), values[3])
        .with(Symbol::Momentum(2), values[4])
}

fn coords() -> impl Strategy<Value = [f64; 5]> {
    prop::array::uniform5(prop_oneof![-2.0f64..-0.2, 0.2f64..2.0])
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_parse_round_trip(e in expression()) {
        let text = e.to_string();
        let back = parse_expression(&text, &ParseContext::phase_space(2)).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_expression(&text, &ParseContext::phase_space(2).with_jet(true));
    }

    #[test]
    fn operator_soup_never_panics(text in "[-+*/^()qpt12 .,sincoqrt]{0,40}") {
        let _ = parse_expression(&text, &ParseContext::phase_space(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplify_is_idempotent_and_deterministic(e in tame()) {
        let once = simplify(&e);
        prop_assert_eq!(simplify(&once), once.clone());
        prop_assert_eq!(simplify(&e), once);
    }

    #[test]
    fn simplify_preserves_value(e in tame(), x in coords()) {
        let pt = point(x);
        if let (Ok(a), Ok(b)) = (evaluate(&e, &pt), evaluate(&simplify(&e), &pt)) {
            prop_assert!(close(a, b, 1e-8), "{} vs {}", a, b);
        }
    }

    #[test]
    fn total_derivative_is_linear(f in tame(), g in tame(), c in -5i64..5) {
        let c = Expr::int(c);
        let lhs = total_derivative(&(&c * &f + &g)).unwrap();
        let rhs = c * total_derivative(&f).unwrap() + total_derivative(&g).unwrap();
        prop_assert!(simplify(&(lhs - rhs)).is_zero());
    }

    #[test]
    fn total_derivative_obeys_leibniz(f in tame(), g in tame()) {
        let lhs = total_derivative(&(&f * &g)).unwrap();
        let rhs = total_derivative(&f).unwrap() * &g + &f * total_derivative(&g).unwrap();
        prop_assert!(is_zero(&(lhs - rhs), &ZeroTest::default()).is_zero());
    }

    #[test]
    fn mixed_partials_commute(f in tame()) {
        let (a, b) = (Symbol::Coord(1), Symbol::Momentum(2));
        let ab = partial_diff(&partial_diff(&f, &a), &b);
        let ba = partial_diff(&partial_diff(&f, &b), &a);
        prop_assert!(is_zero(&(ab - ba), &ZeroTest::default()).is_zero());
    }

    #[test]
    fn partial_matches_finite_difference(f in tame(), x in coords()) {
        let s = Symbol::Coord(1);
        let df = partial_diff(&f, &s);
        let h = 1e-6;
        let shifted = |d: f64| {
            let mut v = x;
            v[1] += d;
            evaluate(&f, &point(v))
        };
        if let (Ok(exact), Ok(up), Ok(down)) = (evaluate(&df, &point(x)), shifted(h), shifted(-h)) {
            let fd = (up - down) / (2.0 * h);
            // truncation grows with the third derivative, rounding with |f|/h
            let scale = 1.0 + exact.abs() + up.abs().max(down.abs());
            prop_assert!((exact - fd).abs() <= 1e-4 * scale, "{} vs {}", exact, fd);
        }
    }

    #[test]
    fn compiled_agrees_with_tree(e in expression()) {
        let f = compile(&e, 2, &BTreeMap::new()).unwrap();
        let mut rng_state = 0x2545f4914f6cdd1du64;
        for _ in 0..100 {
            let mut v = [0.0; 5];
            for slot in &mut v {
                rng_state ^= rng_state << 13;
                rng_state ^= rng_state >> 7;
                rng_state ^= rng_state << 17;
                *slot = (rng_state % 4000) as f64 / 1000.0 - 2.0;
            }
            let tree = evaluate(&e, &point(v));
            let flat = f.eval(&[v[0], v[1], v[2], v[3], v[4]]);
            match (tree, flat) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }
}
