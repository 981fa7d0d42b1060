#![allow(dead_code)]

use rand::Rng;
use rkdarboux::rk::OdeSystem;

/// A point in `[-1, 1]^n` kept away from the poles of a rational field.
pub fn sample_point<R: Rng>(rng: &mut R, sys: &OdeSystem) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if sys.field().iter().all(|f| f.den().eval(&x).map(|d: f64| d.abs() > 0.2).unwrap_or(false)) {
            return x;
        }
    }
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
