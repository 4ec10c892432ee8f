use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, Quadratic};
use crate::geometry::ConstraintSet;
use crate::linalg::{Matrix, Vector};
use crate::math;

/// A strongly convex quadratic whose unconstrained minimizer lies at distance
/// `3 * radius` from the origin, paired with the ball of that radius.
///
/// Panics if `n == 0` or `radius <= 0`.
pub fn random_constrained_quadratic(seed: u64, n: usize, radius: f64) -> (Quadratic, ConstraintSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = 0.0;
            for k in 0..n {
                s += b[k * n + i] * b[k * n + j];
            }
            s /= n as f64;
            if i == j {
                s += 0.1;
            }
            q.set(i, j, s);
            q.set(j, i, s);
        }
    }
    let dir = Vector::from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    let x_free = dir.scale(3.0 * radius / dir.norm2());
    let lin = q.mul_vec(&x_free);
    let quad = Quadratic::new(q, lin, 0.0).expect("symmetric by construction");
    let ball = ConstraintSet::centered_ball(n, radius).expect("positive radius");
    (quad, ball)
}

/// Noise-free regression data `y = A beta`.
///
/// Entries of `A` are uniform on `[-1, 1]`; column `j` is then scaled by a
/// geometric ramp from `1` to `sqrt(column_condition)`, so the Gram matrix
/// has condition number of order `column_condition`. Returns the data and the
/// generating coefficients.
pub fn synthetic_least_squares(
    seed: u64,
    samples: usize,
    features: usize,
    column_condition: f64,
) -> (Dataset, Vector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = math::sqrt(column_condition.max(1.0));
    let scales: Vec<f64> = (0..features)
        .map(|j| {
            if features <= 1 {
                1.0
            } else {
                libm::pow(top, j as f64 / (features - 1) as f64)
            }
        })
        .collect();
    let mut data = Vec::with_capacity(samples * features);
    for _ in 0..samples {
        for s in &scales {
            data.push(rng.random_range(-1.0..1.0) * s);
        }
    }
    let a = Matrix::new(samples, features, data).expect("shape by construction");
    let beta = Vector::from_vec((0..features).map(|_| rng.random_range(-1.0..1.0)).collect());
    let y = a.mul_vec(&beta);
    (Dataset::new(a, y).expect("finite by construction"), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Problem;

    #[test]
    fn quadratic_minimizer_outside_ball() {
        let (q, ball) = random_constrained_quadratic(1, 20, 1.0);
        // grad f(x_free) = 0 at distance 3.
        let g0 = q.gradient(&Vector::zeros(20));
        assert!(g0.norm2() > 0.0);
        assert!(q.smoothness().unwrap().value > 0.1);
        assert_eq!(ball.dim(), 20);
    }

    #[test]
    fn least_squares_data_is_consistent() {
        let (d, beta) = synthetic_least_squares(3, 40, 10, 100.0);
        assert_eq!(d.samples(), 40);
        assert_eq!(d.feature_count(), 10);
        let r = &d.features().mul_vec(&beta) - d.targets();
        assert!(r.norm2() < 1e-12);
        let (d2, _) = synthetic_least_squares(3, 40, 10, 100.0);
        assert_eq!(d, d2);
    }
}
