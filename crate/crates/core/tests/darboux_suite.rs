mod common;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkdarboux::darboux::{
    check_higher_integrals, check_modified_integral, check_preservation, check_rational_integral,
    discrete_cofactor_numeric, discrete_cofactor_symbolic, iteration_index_integral, modified_exponent,
    preservation_with, HigherIntegralSystem, SecondIntegral,
};
use rkdarboux::fixtures::{fixture, AFFINE_FIXTURES};
use rkdarboux::linalg::Matrix;
use rkdarboux::polycore::parse_polynomial;
use rkdarboux::rk::{stability_function, ButcherTableau, REGISTERED};
use rkdarboux::{rat, rat_int, CofactorEvaluator64, Poly, RatFun, RkMap64};

use common::sample_point;

fn tableaux() -> Vec<ButcherTableau> {
    REGISTERED.iter().map(|id| ButcherTableau::by_id(id).unwrap()).collect()
}

#[test]
fn discrete_cofactor_identity_on_all_affine_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for name in AFFINE_FIXTURES {
        let spec = fixture(name).unwrap();
        for t in tableaux() {
            for (integral, form) in spec.affine_integrals() {
                let ev = CofactorEvaluator64::new(&t, &spec.system, &integral.cofactor);
                let (mut done, mut skipped) = (0, 0);
                while done < 20 {
                    let x = sample_point(&mut rng, &spec.system);
                    let h = rng.random_range(-0.1..0.1);
                    // (x, h) without a stage solution is outside the precondition
                    let Ok(r) = preservation_with(&ev, &form, &x, h) else {
                        skipped += 1;
                        assert!(skipped <= 2, "{name}/{}: stage solver keeps failing", t.id());
                        continue;
                    };
                    assert!(r.relative() <= 1e-11, "{name}/{}/{}: {r:?}", t.id(), integral.name);
                    done += 1;
                }
            }
        }
    }
}

#[test]
fn zero_level_set_stays_put() {
    let spec = fixture("ralston").unwrap();
    let t = ButcherTableau::by_id("ralston").unwrap();
    let p3 = spec.integral("p3").unwrap();
    for x0 in [-0.7, 0.2, 0.9] {
        let r = check_preservation(&t, &spec.system, p3, &[x0, 0.0], 1e-3).unwrap();
        assert!(r.p_next.abs() <= 1e-12);
    }
}

#[test]
fn symbolic_cofactor_matches_numeric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["ralston", "lv2", "lv3", "nonrat", "jordan3"] {
        let spec = fixture(name).unwrap();
        for t in tableaux().into_iter().filter(|t| t.is_explicit()) {
            for integral in &spec.integrals {
                let c = integral.cofactor.as_polynomial().unwrap();
                let sym = discrete_cofactor_symbolic(&t, &spec.system, &c).unwrap();
                for _ in 0..10 {
                    let mut xh = sample_point(&mut rng, &spec.system);
                    let h = rng.random_range(-0.1..0.1);
                    let num = discrete_cofactor_numeric(&t, &spec.system, &integral.cofactor, &xh, h).unwrap();
                    xh.push(h);
                    let s: f64 = sym.eval(&xh).unwrap();
                    assert!((s - num).abs() <= 1e-12 * s.abs().max(1.0), "{name}/{}", t.id());
                }
            }
        }
    }
}

#[test]
fn lv_theta_family_cofactor_is_exact() {
    let spec = fixture("lv2").unwrap();
    let v: Vec<String> = ["x", "y", "h"].iter().map(|s| s.to_string()).collect();
    let c = parse_polynomial("x - y", spec.system.vars()).unwrap();
    for theta in [rat(1, 2), rat(2, 3), rat(1, 1), rat(-3, 5), rat(7, 4)] {
        let t = ButcherTableau::theta_explicit(theta.clone()).unwrap();
        let got = discrete_cofactor_symbolic(&t, &spec.system, &c).unwrap();
        let expect = parse_polynomial(
            &format!("1 + h*(x - y) + h^2*(x - y)^2 + ({theta})/2*h^3*(x - y)^3"),
            &v,
        )
        .unwrap();
        assert_eq!(got, expect, "theta = {theta}");
    }
}

#[test]
fn constant_cofactor_collapses_to_stability_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = fixture("lv3").unwrap();
    for t in tableaux() {
        let r = stability_function(&t);
        for _ in 0..20 {
            let lam = rat(rng.random_range(-40..=40), 8);
            let lf = lam.to_f64().unwrap();
            let h = if lf == 0.0 { 0.05 } else { rng.random_range(-1.0..1.0) / lf.abs() };
            let c = RatFun::constant(3, lam);
            let x = [0.3, 0.2, 0.1];
            let got = discrete_cofactor_numeric(&t, &spec.system, &c, &x, h).unwrap();
            let want = r.eval(&[lf * h]).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{}", t.id());
        }
    }
}

#[test]
fn cofactor_does_not_depend_on_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let spec = fixture("ralston").unwrap();
    for t in tableaux() {
        for integral in &spec.integrals {
            let scaled = SecondIntegral::verified(
                "seven",
                integral.p.scale(&rat_int(7)),
                integral.cofactor.clone(),
                &spec.system,
            )
            .unwrap();
            for _ in 0..5 {
                let x = sample_point(&mut rng, &spec.system);
                let h = rng.random_range(-0.1..0.1);
                let a = check_preservation(&t, &spec.system, integral, &x, h).unwrap();
                let b = check_preservation(&t, &spec.system, &scaled, &x, h).unwrap();
                assert!((a.ctilde - b.ctilde).abs() <= 1e-12 * a.ctilde.abs().max(1.0));
                if a.p_x.abs() > 1e-3 {
                    let (ra, rb) = (a.p_next / a.p_x, b.p_next / b.p_x);
                    assert!((ra - rb).abs() <= 1e-12 * ra.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn shared_cofactor_quotients_are_conserved() {
    for (name, q, r) in [("lv2", "px", "py"), ("ratode", "q", "r")] {
        let spec = fixture(name).unwrap();
        let (q, r) = (spec.integral(q).unwrap().affine().unwrap(), spec.integral(r).unwrap().affine().unwrap());
        let x0 = spec.run.x0.clone().unwrap();
        for t in tableaux() {
            let traj = RkMap64::new(&t, &spec.system).trajectory(&x0, 1e-2, 1000).unwrap();
            let drift = check_rational_integral(&q, &r, &traj).unwrap();
            assert!(drift <= 1e-10, "{name}/{}: {drift:e}", t.id());
        }
    }
}

#[test]
fn nonrational_integral_needs_modified_exponent() {
    let spec = fixture("nonrat").unwrap();
    let (p1, p2) = (spec.integral("p1").unwrap().affine().unwrap(), spec.integral("p2").unwrap().affine().unwrap());
    let fe = ButcherTableau::by_id("forward-euler").unwrap();
    let h = 1e-2;
    let traj = RkMap64::new(&fe, &spec.system).trajectory(&[1.0, 0.0, 1.0], h, 1000).unwrap();
    let st = modified_exponent(&stability_function(&fe), h, 1.0, 2.0).unwrap();
    assert!((st - (1.0f64 + 2.0 * h).ln() / (1.0f64 + h).ln()).abs() < 1e-15);
    let modified = check_modified_integral(&p1, &p2, st, &traj).unwrap();
    let plain = check_modified_integral(&p1, &p2, 2.0, &traj).unwrap();
    assert!(modified <= 1e-9, "{modified:e}");
    assert!(plain >= 10.0 * modified.max(f64::MIN_POSITIVE));
    let fixed = vec![vec![0.0, 0.0, 0.0]];
    assert!(check_modified_integral(&p1, &p2, st, &fixed).is_err());
}

#[test]
fn iteration_index_integrals() {
    let spec = fixture("lv3").unwrap();
    let total = spec.integral("total").unwrap().affine().unwrap();
    let h = 1e-3;
    let x0 = [0.5, 0.3, 0.2];
    let fe = ButcherTableau::by_id("forward-euler").unwrap();
    let traj = RkMap64::new(&fe, &spec.system).trajectory(&x0, h, 1000).unwrap();
    assert!(iteration_index_integral(1.0 + 0.5 * h, &total, &traj).unwrap() <= 1e-10);
    let gl = ButcherTableau::by_id("gauss-2").unwrap();
    let traj = RkMap64::new(&gl, &spec.system).trajectory(&x0, h, 1000).unwrap();
    let ct = stability_function(&gl).eval(&[0.5 * h]).unwrap();
    assert!(iteration_index_integral(ct, &total, &traj).unwrap() <= 1e-10);
}

#[test]
fn higher_integral_identities() {
    let jordan = fixture("jordan3").unwrap();
    let hs = jordan.higher.clone().unwrap();
    let kahan = ButcherTableau::by_id("kahan").unwrap();
    let chk = check_higher_integrals(&kahan, &jordan.system, &hs, &[0.1, 0.2, 0.3], 1e-2).unwrap();
    assert!(chk.residual <= 1e-11 * (1.0 + chk.p_x.iter().fold(0.0f64, |m, v| m.max(v.abs()))));

    // two first integrals of a linear rotation-free system: L = 0
    let v: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
    let f: Vec<Poly> = ["y", "0"].iter().map(|s| parse_polynomial(s, &v).unwrap()).collect();
    let sys = rkdarboux::rk::OdeSystem::from_polys("shear", v, f).unwrap();
    let first = HigherIntegralSystem::linear(Matrix::from_rows(vec![vec![rat_int(0), rat_int(1)]]), Matrix::zeros(1, 1), &sys)
        .unwrap();
    for t in tableaux() {
        let c = check_higher_integrals(&t, &sys, &first, &[0.4, -0.3], 0.1).unwrap();
        assert_eq!(c.p_next, c.p_x);
    }

    // diagonal L under forward Euler scales each form by 1 + h λ_i
    let nonrat = fixture("nonrat").unwrap();
    let d = Matrix::from_rows(vec![
        nonrat.integral("p1").unwrap().affine().unwrap().alpha,
        nonrat.integral("p2").unwrap().affine().unwrap().alpha,
    ]);
    let l = Matrix::from_rows(vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(2)]]);
    let diag = HigherIntegralSystem::linear(d, l, &nonrat.system).unwrap();
    let fe = ButcherTableau::by_id("forward-euler").unwrap();
    let c = check_higher_integrals(&fe, &nonrat.system, &diag, &[0.3, -0.2, 0.5], 0.05).unwrap();
    assert_eq!(c.r_hl, vec![1.05, 0.0, 0.0, 1.1]);
    assert!(c.residual <= 1e-14);
}

#[test]
fn irreducible_quadratic_is_not_preserved() {
    let spec = fixture("circle-negative").unwrap();
    let p = &spec.integral("circle").unwrap().p;
    let fe = RkMap64::new(&ButcherTableau::by_id("forward-euler").unwrap(), &spec.system);
    let h = 1e-2;
    let one: f64 = p.eval(&fe.step(&[1.0, 0.0], h).unwrap().next).unwrap();
    assert!(one.abs() >= 1e-5, "{one:e}");
    // exact value: |(1, h)|^2 - 1 = h^2
    assert!((one - h * h).abs() < 1e-15);
}
