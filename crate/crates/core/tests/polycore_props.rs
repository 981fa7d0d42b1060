use num_rational::BigRational;
use proptest::prelude::*;
use rkdarboux::polycore::{parse_polynomial, AffineForm, Polynomial};
use rkdarboux::{rat, Poly};

const N: usize = 3;

fn names() -> Vec<String> {
    ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
}

fn coeff() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..=3, N), coeff()), 0..6)
        .prop_map(|terms| Polynomial::from_terms(N, terms))
}

fn affine() -> impl Strategy<Value = AffineForm> {
    (prop::collection::vec(coeff(), N), coeff())
        .prop_filter("nonconstant", |(a, _)| a.iter().any(|c| *c != rat(0, 1)))
        .prop_map(|(a, a0)| AffineForm::new(a, a0))
}

fn point() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(coeff(), N)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), x in point()) {
        let (px, qx) = (p.eval_exact(&x), q.eval_exact(&x));
        prop_assert_eq!((&p + &q).eval_exact(&x), &px + &qx);
        prop_assert_eq!((&p * &q).eval_exact(&x), &px * &qx);
    }

    #[test]
    fn leibniz_rule(p in poly(), q in poly(), i in 0..N) {
        let lhs = (&p * &q).derivative(i);
        let rhs = &(&p.derivative(i) * &q) + &(&p * &q.derivative(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn affine_divides_its_multiples(p in poly(), a in affine()) {
        let q = a.to_polynomial();
        let prod = &q * &p;
        prop_assert!(prod.divisible_by(&q).unwrap());
        prop_assert_eq!(prod.exact_div(&q).unwrap(), Some(p));
    }

    #[test]
    fn print_parse_round_trip(p in poly()) {
        let text = p.render(&names());
        prop_assert_eq!(parse_polynomial(&text, &names()).unwrap(), p);
    }

    #[test]
    fn float_eval_close_to_exact(p in poly(), x in point()) {
        use num_traits::ToPrimitive;
        let xf: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap()).collect();
        let exact = p.eval_exact(&x).to_f64().unwrap();
        let approx = p.eval(&xf).unwrap();
        // one rounding per operation, scaled by the sum of term magnitudes
        let bound: f64 = p
            .terms()
            .map(|(m, c)| {
                let mono: f64 = m.exponents().iter().zip(&xf).map(|(&e, v)| v.abs().powi(e as i32)).product();
                c.to_f64().unwrap().abs() * mono
            })
            .sum::<f64>()
            * 32.0
            * f64::EPSILON;
        prop_assert!((exact - approx).abs() <= bound + f64::MIN_POSITIVE, "{exact} vs {approx}");
    }
}
