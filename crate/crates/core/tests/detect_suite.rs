use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkdarboux::darboux::{check_rational_integral, discrete_cofactor_numeric};
use rkdarboux::detect::{
    canonical, decouple, detect_rational_integral, find_constant_cofactor_dps, find_dps_given_cofactor,
    forward_euler_jacobian_det, verify_divisibility_thm, Cofactor, DetectOptions,
};
use rkdarboux::fixtures::fixture;
use rkdarboux::linalg::Matrix;
use rkdarboux::polycore::{parse_polynomial, parse_rational, Monomial, Polynomial};
use rkdarboux::rk::{ButcherTableau, OdeSystem};
use rkdarboux::{rat, rat_int, Poly, RatFun, Rational, RkMap64};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat_int(v)).collect()).collect())
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// `ẋ = A x + c0 + Σ m_k(x) v_k` with `αᵀA = λαᵀ` and every `v_k ⊥ α`.
fn planted(alpha: &[Rational], lambda: &Rational, a0: &[Vec<Rational>], c0: &[Rational], vs: &[Vec<Rational>]) -> Vec<Poly> {
    let n = alpha.len();
    let aa = dot(alpha, alpha);
    // A = A0 + (α/|α|²) wᵀ with w = λα - A0ᵀα
    let w: Vec<Rational> =
        (0..n).map(|j| lambda * &alpha[j] - (0..n).fold(Rational::zero(), |acc, i| acc + &a0[i][j] * &alpha[i])).collect();
    let a: Vec<Vec<Rational>> =
        (0..n).map(|i| (0..n).map(|j| &a0[i][j] + &alpha[i] * &w[j] / &aa).collect()).collect();
    let vs: Vec<Vec<Rational>> = vs
        .iter()
        .map(|v| {
            let k = dot(alpha, v) / &aa;
            v.iter().zip(alpha).map(|(vi, ai)| vi - &k * ai).collect()
        })
        .collect();
    let monos = [vec![2, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![0, 2, 0]];
    (0..n)
        .map(|i| {
            let mut p = Polynomial::affine(&a[i], c0[i].clone());
            for (v, e) in vs.iter().zip(&monos) {
                p = p + Polynomial::monomial(Monomial::from_exponents(e.clone()), v[i].clone());
            }
            p
        })
        .collect()
}

fn small() -> impl Strategy<Value = Rational> {
    (-5i64..=5).prop_map(rat_int)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn planted_constant_cofactor_dp_is_found(
        alpha in prop::collection::vec(small(), 3).prop_filter("nonzero", |a| a.iter().any(|c| !c.is_zero())),
        lambda in (1i64..=6, prop::bool::ANY).prop_map(|(k, s)| rat(if s { k } else { -k }, 2)),
        a0 in prop::collection::vec(prop::collection::vec(small(), 3), 3),
        c0 in prop::collection::vec(small(), 3),
        vs in prop::collection::vec(prop::collection::vec(small(), 3), 2),
    ) {
        let f = planted(&alpha, &lambda, &a0, &c0, &vs);
        let sys = OdeSystem::polynomial(f.clone()).unwrap();
        let dps = find_constant_cofactor_dps(&sys);
        for dp in &dps {
            prop_assert!(dp.verify(&f));
        }
        let same: Vec<Vec<Rational>> = dps
            .iter()
            .filter_map(|dp| dp.rational())
            .filter(|(_, l)| *l == lambda)
            .map(|(form, _)| form.alpha)
            .collect();
        prop_assert!(!same.is_empty());
        let span = Matrix::from_rows(same.clone());
        let with = Matrix::from_rows(same.into_iter().chain([alpha.clone()]).collect());
        prop_assert_eq!(span.rank(), with.rank());
    }
}

#[test]
fn three_forms_sharing_a_cofactor() {
    // ẋ_i = g(x) x_i: every x_i has cofactor g
    let v = names(&["x1", "x2", "x3"]);
    let g = parse_polynomial("1 + x1 + 2*x2 - x3", &v).unwrap();
    let f: Vec<Poly> = (0..3).map(|i| &g * &Poly::var(3, i)).collect();
    let sys = OdeSystem::from_polys("shared", v.clone(), f).unwrap();
    let det = forward_euler_jacobian_det(&sys).unwrap();
    // determinant lemma: det(I + h(g I + x ∇gᵀ)) = (1 + h g)^2 (1 + h g + h ∇g·x)
    let vh = names(&["x1", "x2", "x3", "h"]);
    let oracle = parse_polynomial(
        "(1 + h*(1 + x1 + 2*x2 - x3))^2 * (1 + h*(1 + x1 + 2*x2 - x3) + h*(x1 + 2*x2 - x3))",
        &vh,
    )
    .unwrap();
    assert!(det.equivalent(&RatFun::from_poly(oracle.clone())));
    let ct = parse_polynomial("1 + h*(1 + x1 + 2*x2 - x3)", &vh).unwrap();
    let (q, r) = oracle.div_rem(&ct.pow(2)).unwrap();
    assert!(r.is_zero() && !q.is_zero());
    assert!(verify_divisibility_thm(&det, &RatFun::from_poly(ct.clone()), 3).unwrap());
    assert!(!verify_divisibility_thm(&det, &RatFun::from_poly(ct), 4).unwrap());
    let forms = find_dps_given_cofactor(&sys, &Cofactor::Continuous(RatFun::from_poly(g))).unwrap();
    assert_eq!(forms.len(), 3);
}

#[test]
fn determinant_special_cases() {
    let v = names(&["x", "y"]);
    let zero = OdeSystem::from_polys("zero", v.clone(), vec![Poly::zero(2), Poly::zero(2)]).unwrap();
    assert!(forward_euler_jacobian_det(&zero).unwrap().equivalent(&RatFun::constant(3, rat_int(1))));
    let f = ["2*x + y", "x - 3*y"].iter().map(|s| parse_polynomial(s, &v).unwrap()).collect();
    let lin = OdeSystem::from_polys("lin", v, f).unwrap();
    let det = forward_euler_jacobian_det(&lin).unwrap();
    let want = parse_polynomial("(1 + 2*h)*(1 - 3*h) - h^2", &names(&["x", "y", "h"])).unwrap();
    assert!(det.equivalent(&RatFun::from_poly(want)));
}

#[test]
fn forms_for_a_given_cofactor() {
    let spec = fixture("ralston").unwrap();
    let v = spec.system.vars().to_vec();
    let c = parse_rational("x + 5*y", &v).unwrap();
    let forms = find_dps_given_cofactor(&spec.system, &Cofactor::Continuous(c)).unwrap();
    assert_eq!(forms.len(), 1);
    assert_eq!(forms[0].to_polynomial(), parse_polynomial("x + y", &v).unwrap());
    let one = RatFun::constant(2, rat_int(1));
    assert!(find_dps_given_cofactor(&spec.system, &Cofactor::Continuous(one)).unwrap().is_empty());
}

#[test]
fn detected_integrals_are_conserved_and_linearize_correctly() {
    let heun = ButcherTableau::by_id("heun").unwrap();
    let fe = ButcherTableau::by_id("forward-euler").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for name in ["ratode", "lv2"] {
        let spec = fixture(name).unwrap();
        let rep = detect_rational_integral(&spec.system, &DetectOptions::default()).unwrap();
        assert!(!rep.integrals.is_empty(), "{name}");
        for integral in &rep.integrals {
            let x0 = spec.run.x0.clone().unwrap();
            let traj = RkMap64::new(&fe, &spec.system).trajectory(&x0, 1e-2, 1000).unwrap();
            let drift = check_rational_integral(integral.q(), integral.r(), &traj).unwrap();
            assert!(drift <= 1e-10, "{name}: {drift:e}");

            // (c̃ - 1)/h → c at first order
            for _ in 0..5 {
                let x: Vec<f64> = loop {
                    let x: Vec<f64> = (0..spec.system.dim()).map(|_| rng.random_range(0.2..1.0)).collect();
                    if integral.cofactor.den().eval(&x).map(|d: f64| d.abs() > 0.2).unwrap_or(false) {
                        break x;
                    }
                };
                let c: f64 = integral.cofactor.eval(&x).unwrap();
                let err = |h: f64| {
                    let ct = discrete_cofactor_numeric(&heun, &spec.system, &integral.cofactor, &x, h).unwrap();
                    ((ct - 1.0) / h - c).abs()
                };
                let ratio = err(1e-3) / err(1e-4);
                assert!((8.0..=12.0).contains(&ratio), "{name}: ratio {ratio}");
            }
        }
    }
}

#[test]
fn generic_linear_system_has_no_rational_integral() {
    let v = names(&["x", "y"]);
    let f = ["x + y", "2*y"].iter().map(|s| parse_polynomial(s, &v).unwrap()).collect();
    let sys = OdeSystem::from_polys("generic", v, f).unwrap();
    let rep = detect_rational_integral(&sys, &DetectOptions::default()).unwrap();
    assert!(rep.integrals.is_empty());
}

fn check_decoupling(name: &str) -> rkdarboux::detect::DecoupleResult {
    let spec = fixture(name).unwrap();
    let d = decouple(&spec.system).unwrap();
    assert!(d.g.inverse().is_some(), "{name}");
    if d.m() > 0 {
        let hs = d.to_higher_system(&spec.system).unwrap();
        assert!(hs.holds(&spec.system));
    }
    let n = spec.system.dim();
    for i in 0..d.m() {
        let want = (0..d.m()).fold(Poly::zero(n), |acc, j| acc + Poly::var(n, j).scale(&d.l[(i, j)]));
        assert_eq!(d.transformed_field[i], want, "{name} component {i}");
    }
    d
}

#[test]
fn decoupling_invariants_on_polynomial_fixtures() {
    for name in ["ralston", "lv2", "lv3", "nonrat", "jordan3", "skew3", "fivedim-alg1", "fivedim-complex", "circle-negative"] {
        check_decoupling(name);
    }
    assert_eq!(check_decoupling("fivedim-complex").m(), 4);
    assert_eq!(check_decoupling("skew3").m(), 2);
    assert_eq!(check_decoupling("circle-negative").m(), 0);
}

#[test]
fn five_dimensional_example_matches_reference_matrices() {
    let d = check_decoupling("fivedim-alg1");
    assert_eq!(d.m(), 3);
    let q = mat(&[&[1, 1, 0, 2, 0], &[0, -1, 1, -2, 0], &[0, 0, -1, 1, 0]]);
    let l = mat(&[&[1, 0, 0], &[1, 1, 0], &[-9, -6, 1]]);
    assert_eq!(d.canonical(), canonical(&q, &[rat_int(0), rat_int(0), rat_int(0)], &l));
    let first = find_constant_cofactor_dps(&fixture("fivedim-alg1").unwrap().system);
    assert!(first.iter().filter_map(|dp| dp.rational()).any(|(form, lam)| {
        lam == rat_int(1) && form.alpha == [1, 1, 0, 2, 0].map(rat_int).to_vec()
    }));
}
