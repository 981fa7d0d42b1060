use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkdarboux::fixtures::fixture;
use rkdarboux::polycore::Polynomial;
use rkdarboux::rk::{matrix_stability, stability_function, ButcherTableau, OdeSystem, RkMap, REGISTERED};
use rkdarboux::{rat, RkMap32, RkMap64};

fn tableaux() -> Vec<ButcherTableau> {
    REGISTERED.iter().map(|id| ButcherTableau::by_id(id).unwrap()).collect()
}

/// Eqs. for an explicit method written out directly: `g_i = x + h Σ_{j<i} a_ij f(g_j)`,
/// `x' = x + h Σ b_j f(g_j)`.
fn reference_step(t: &ButcherTableau, sys: &OdeSystem, x: &[f64], h: f64) -> Vec<f64> {
    let (a, b, _) = t.to_scalar::<f64>();
    let s = b.len();
    let mut k: Vec<Vec<f64>> = Vec::new();
    for i in 0..s {
        let mut g = Vec::with_capacity(x.len());
        for (c, xc) in x.iter().enumerate() {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate() {
                acc += a[i * s + j] * kj[c];
            }
            g.push(xc + h * acc);
        }
        k.push(sys.eval(&g).unwrap());
    }
    (0..x.len())
        .map(|c| {
            let mut acc = 0.0;
            for j in 0..s {
                acc += b[j] * k[j][c];
            }
            x[c] + h * acc
        })
        .collect()
}

#[test]
fn explicit_steps_match_reference_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in ["ralston", "lv2", "lv3", "nonrat", "jordan3", "skew3", "fivedim-alg1"] {
        let sys = fixture(name).unwrap().system;
        for t in tableaux().iter().filter(|t| t.is_explicit()) {
            let map = RkMap64::new(t, &sys);
            for _ in 0..10 {
                let x: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let h = rng.random_range(-0.1..0.1);
                assert_eq!(map.step(&x, h).unwrap().next, reference_step(t, &sys, &x, h), "{name}/{}", t.id());
            }
        }
    }
}

fn linear(lambda: num_rational::BigRational) -> OdeSystem {
    OdeSystem::polynomial(vec![Polynomial::var(1, 0).scale(&lambda)]).unwrap()
}

#[test]
fn stability_function_predicts_scalar_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in tableaux() {
        let r = stability_function(&t);
        for _ in 0..20 {
            let lam = rat(rng.random_range(1..=32) * if rng.random_bool(0.5) { 1 } else { -1 }, 8);
            let lf: f64 = num_traits::ToPrimitive::to_f64(&lam).unwrap();
            let h = rng.random_range(-1.0..1.0) / lf.abs();
            let x = rng.random_range(0.5..2.0);
            let next = RkMap64::new(&t, &linear(lam)).step(&[x], h).unwrap().next[0];
            let pred = r.eval(&[lf * h]).unwrap() * x;
            assert!((next - pred).abs() <= 1e-12 * pred.abs().max(1e-300), "{}: {next} vs {pred}", t.id());
        }
    }
}

#[test]
fn jordan_blocks_pick_up_the_derivative() {
    for t in tableaux() {
        let r = stability_function(&t);
        let dr = r.derivative(0);
        for (sigma, h) in [(0.5f64, 0.1f64), (-2.0, 0.3), (1.0, -0.2)] {
            let m: Vec<f64> = matrix_stability(&r, &[sigma, 1.0, 0.0, sigma], 2, h).unwrap();
            let z = h * sigma;
            let expect = [r.eval(&[z]).unwrap(), h * dr.eval(&[z]).unwrap(), 0.0, r.eval(&[z]).unwrap()];
            for (a, b) in m.iter().zip(expect) {
                assert!((a - b).abs() <= 1e-12, "{}: {m:?} vs {expect:?}", t.id());
            }
        }
    }
}

/// Reference solution by 2000 classical RK4 substeps.
fn reference(sys: &OdeSystem, x: &[f64], h: f64) -> Vec<f64> {
    let rk4 = RkMap64::new(&ButcherTableau::by_id("rk4").unwrap(), sys);
    let n = 2000;
    let mut y = x.to_vec();
    for _ in 0..n {
        y = rk4.step(&y, h / n as f64).unwrap().next;
    }
    y
}

#[test]
fn local_error_scales_with_order() {
    let sys = fixture("lv3").unwrap().system;
    let x = [0.5, 0.3, 0.2];
    let hs = [1e-1, 5e-2, 2.5e-2];
    let exact: Vec<Vec<f64>> = hs.iter().map(|&h| reference(&sys, &x, h)).collect();
    for t in tableaux() {
        let map = RkMap64::new(&t, &sys);
        let err: Vec<f64> = hs
            .iter()
            .zip(&exact)
            .map(|(&h, e)| {
                let y = map.step(&x, h).unwrap().next;
                y.iter().zip(e).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .collect();
        let want = 2f64.powi(t.order() as i32 + 1);
        for w in err.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio >= want / 3.0 && ratio <= want * 3.0, "{}: errors {err:?}", t.id());
        }
    }
}

#[test]
fn ralston_keeps_y_zero() {
    let spec = fixture("ralston").unwrap();
    let map = RkMap64::new(&ButcherTableau::by_id("ralston").unwrap(), &spec.system);
    let traj = map.trajectory(&[0.3, 0.0], 1e-3, 1000).unwrap();
    assert_eq!(traj.len(), 1001);
    assert!(traj.iter().all(|x| x[1] == 0.0));
}

#[test]
fn single_precision_agrees_with_double() {
    let spec = fixture("lv2").unwrap();
    let t = ButcherTableau::by_id("gauss-2").unwrap();
    let y64 = RkMap64::new(&t, &spec.system).step(&[0.5, 0.25], 0.05).unwrap().next;
    let y32 = RkMap32::new(&t, &spec.system).step(&[0.5f32, 0.25], 0.05).unwrap().next;
    for (a, b) in y64.iter().zip(&y32) {
        assert!((a - *b as f64).abs() < 1e-5);
    }
}

#[test]
fn generic_map_type_is_reexported() {
    let spec = fixture("lv2").unwrap();
    let m: RkMap<f64> = RkMap::new(&ButcherTableau::by_id("heun").unwrap(), &spec.system);
    assert_eq!(m.dim(), 2);
}
