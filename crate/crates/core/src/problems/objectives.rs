use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use super::{Constant, Dataset, Problem};
use crate::error::{check_dim, Result, UmdError};
use crate::linalg::{Matrix, NormTag, Vector};
use crate::math;
use crate::problems::reference::POWER_ITERATION_TOL;

/// `f(b) = (1/n) sum (y_i - <b, a_i>)^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    data: Dataset,
    smoothness: f64,
}

pub fn make_least_squares(data: Dataset) -> LeastSquares {
    let n = data.samples() as f64;
    let smoothness = 2.0 / n * data.features().gram_lambda_max(POWER_ITERATION_TOL);
    LeastSquares { data, smoothness }
}

impl LeastSquares {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn residual(&self, beta: &Vector) -> Vector {
        &self.data.features().mul_vec(beta) - self.data.targets()
    }
}

impl Problem for LeastSquares {
    fn dim(&self) -> usize {
        self.data.feature_count()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let r = self.residual(beta);
        r.dot(&r) / self.data.samples() as f64
    }

    fn gradient(&self, beta: &Vector) -> Vector {
        let r = self.residual(beta);
        self.data
            .features()
            .tr_mul_vec(&r)
            .scale(2.0 / self.data.samples() as f64)
    }

    fn smoothness(&self) -> Option<Constant> {
        Some(Constant::new(self.smoothness, NormTag::L2))
    }

    fn name(&self) -> String {
        format!("least-squares({})", self.data.describe())
    }
}

/// `f(b) = (1/n) sum ln(1 + exp(-y_i <b, a_i>))` with `y_i in {-1, +1}`.
#[derive(Debug, Clone)]
pub struct Logistic {
    data: Dataset,
    smoothness: f64,
}

pub fn make_logistic(data: Dataset) -> Result<Logistic> {
    if let Some(i) = data
        .targets()
        .iter()
        .position(|y| *y != 1.0 && *y != -1.0)
    {
        return Err(UmdError::Label(format!(
            "row {i}: target {} is not -1 or +1",
            data.targets()[i]
        )));
    }
    let n = data.samples() as f64;
    let smoothness = data.features().gram_lambda_max(POWER_ITERATION_TOL) / (4.0 * n);
    Ok(Logistic { data, smoothness })
}

impl Logistic {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn margins(&self, beta: &Vector) -> Vector {
        let m = self.data.features().mul_vec(beta);
        Vector::from_vec(
            m.iter()
                .zip(self.data.targets().iter())
                .map(|(a, y)| a * y)
                .collect(),
        )
    }
}

impl Problem for Logistic {
    fn dim(&self) -> usize {
        self.data.feature_count()
    }

    fn value(&self, beta: &Vector) -> f64 {
        let m = self.margins(beta);
        m.iter().map(|v| math::softplus(-v)).sum::<f64>() / self.data.samples() as f64
    }

    fn gradient(&self, beta: &Vector) -> Vector {
        let m = self.margins(beta);
        // d/dm ln(1 + e^{-m}) = -sigmoid(-m)
        let w = Vector::from_vec(
            m.iter()
                .zip(self.data.targets().iter())
                .map(|(v, y)| -y * math::sigmoid(-v))
                .collect(),
        );
        self.data
            .features()
            .tr_mul_vec(&w)
            .scale(1.0 / self.data.samples() as f64)
    }

    fn smoothness(&self) -> Option<Constant> {
        Some(Constant::new(self.smoothness, NormTag::L2))
    }

    fn name(&self) -> String {
        format!("logistic({})", self.data.describe())
    }
}

/// `f(x) = 1/2 x^T Q x - b^T x + c` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct Quadratic {
    q: Matrix,
    b: Vector,
    c: f64,
    smoothness: f64,
}

impl Quadratic {
    pub fn new(q: Matrix, b: Vector, c: f64) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(UmdError::Dimension {
                expected: q.rows(),
                got: q.cols(),
            });
        }
        check_dim(q.rows(), b.len())?;
        let n = q.rows();
        for i in 0..n {
            for j in 0..i {
                let (a, bb) = (q.get(i, j), q.get(j, i));
                if math::abs(a - bb) > 1e-12 * (1.0 + math::abs(a)) {
                    return Err(UmdError::Argument(format!("Q is not symmetric at ({i}, {j})")));
                }
            }
        }
        let smoothness = q.sym_lambda_max(POWER_ITERATION_TOL);
        Ok(Quadratic { q, b, c, smoothness })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn linear(&self) -> &Vector {
        &self.b
    }
}

impl Problem for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.q.mul_vec(x)) - self.b.dot(x) + self.c
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.q.mul_vec(x) - &self.b
    }

    fn smoothness(&self) -> Option<Constant> {
        Some(Constant::new(self.smoothness, NormTag::L2))
    }

    fn name(&self) -> String {
        format!("quadratic({})", self.b.len())
    }
}

/// `f(x) = ||x - c||_1`. The subgradient is `sign(x_i - c_i)` with `0` at
/// exact ties.
#[derive(Debug, Clone)]
pub struct L1Distance {
    center: Vector,
}

impl L1Distance {
    pub fn new(center: Vector) -> Self {
        L1Distance { center }
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
}

impl Problem for L1Distance {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        (x - &self.center).norm1()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (x - &self.center).map(|d| {
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// `sqrt(n)` w.r.t. L2 (the dual norm of a sign vector).
    fn subgradient_bound(&self) -> Option<Constant> {
        Some(Constant::new(
            math::sqrt(self.center.len() as f64),
            NormTag::L2,
        ))
    }

    fn name(&self) -> String {
        format!("l1-distance({})", self.center.len())
    }
}

/// `f = 0`.
#[derive(Debug, Clone, Copy)]
pub struct ZeroProblem {
    n: usize,
}

impl ZeroProblem {
    pub fn new(n: usize) -> Self {
        ZeroProblem { n }
    }
}

impl Problem for ZeroProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn gradient(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.n)
    }

    fn smoothness(&self) -> Option<Constant> {
        Some(Constant::new(0.0, NormTag::L2))
    }

    fn subgradient_bound(&self) -> Option<Constant> {
        Some(Constant::new(0.0, NormTag::L2))
    }

    fn name(&self) -> String {
        String::from("zero")
    }
}

type ValueFn = Box<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// A problem assembled from closures.
pub struct FnProblem {
    n: usize,
    value: ValueFn,
    gradient: GradFn,
    smoothness: Option<Constant>,
    subgradient_bound: Option<Constant>,
}

impl FnProblem {
    pub fn new(
        n: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        FnProblem {
            n,
            value: Box::new(value),
            gradient: Box::new(gradient),
            smoothness: None,
            subgradient_bound: None,
        }
    }

    pub fn with_smoothness(mut self, c: Constant) -> Self {
        self.smoothness = Some(c);
        self
    }

    pub fn with_subgradient_bound(mut self, c: Constant) -> Self {
        self.subgradient_bound = Some(c);
        self
    }
}

impl Problem for FnProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    fn smoothness(&self) -> Option<Constant> {
        self.smoothness
    }

    fn subgradient_bound(&self) -> Option<Constant> {
        self.subgradient_bound
    }

    fn name(&self) -> String {
        String::from("closure")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::check_gradient;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(seed: u64, rows: usize, cols: usize, labels: bool) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let targets = (0..rows)
            .map(|_| {
                if labels {
                    if rng.random_bool(0.5) {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        Dataset::new(Matrix::new(rows, cols, data).unwrap(), Vector::from_vec(targets)).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vector {
        Vector::from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn least_squares_examples() {
        let d = Dataset::new(Matrix::identity(2), Vector::from_slice(&[1.0, 1.0])).unwrap();
        let p = make_least_squares(d);
        let one = Vector::from_slice(&[1.0, 1.0]);
        assert_eq!(p.value(&one), 0.0);
        assert_eq!(p.gradient(&one), Vector::zeros(2));
        let zero = Vector::zeros(2);
        assert_eq!(p.value(&zero), 1.0);
        assert_eq!(p.gradient(&zero), Vector::from_slice(&[-1.0, -1.0]));
        assert!((p.smoothness().unwrap().value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn least_squares_finite_differences() {
        let p = make_least_squares(random_data(11, 5, 3, false));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert!(check_gradient(&p, &random_point(&mut rng, 3), 1e-5) <= 1e-5);
        }
    }

    #[test]
    fn logistic_examples() {
        let p = make_logistic(random_data(3, 7, 4, true)).unwrap();
        assert!((p.value(&Vector::zeros(4)) - 2f64.ln()).abs() < 1e-15);
        let single = Dataset::new(Matrix::identity(1), Vector::from_slice(&[1.0])).unwrap();
        let q = make_logistic(single).unwrap();
        let mut prev = f64::INFINITY;
        for t in [0.0, 1.0, 10.0, 100.0, 700.0] {
            let f = q.value(&Vector::from_slice(&[t]));
            assert!(f < prev && f.is_finite());
            prev = f;
        }
        assert!(prev < 1e-300);
        assert_eq!(q.value(&Vector::from_slice(&[1e6])), 0.0);
        // Far on the wrong side: finite and linear in t.
        let f = q.value(&Vector::from_slice(&[-1e6]));
        assert!((f - 1e6).abs() < 1e-6);
    }

    #[test]
    fn logistic_finite_differences_and_labels() {
        let p = make_logistic(random_data(12, 5, 3, true)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            assert!(check_gradient(&p, &random_point(&mut rng, 3), 1e-5) <= 1e-5);
        }
        let bad = Dataset::new(Matrix::identity(2), Vector::from_slice(&[1.0, 0.0])).unwrap();
        assert!(matches!(make_logistic(bad), Err(UmdError::Label(_))));
    }

    #[test]
    fn declared_smoothness_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let problems: [Box<dyn Problem>; 2] = [
            Box::new(make_least_squares(random_data(21, 9, 4, false))),
            Box::new(make_logistic(random_data(22, 9, 4, true)).unwrap()),
        ];
        for p in &problems {
            let l = p.smoothness().unwrap().value;
            for _ in 0..1000 {
                let x = random_point(&mut rng, 4).scale(5.0);
                let y = random_point(&mut rng, 4).scale(5.0);
                let lhs = (&p.gradient(&x) - &p.gradient(&y)).norm2();
                assert!(lhs <= l * x.distance(&y) + 1e-7);
            }
        }
    }

    #[test]
    fn l1_subgradient_is_bounded_and_valid() {
        let c = Vector::from_slice(&[0.5, -0.2, 0.0]);
        let p = L1Distance::new(c.clone());
        assert_eq!(p.gradient(&c), Vector::zeros(3));
        let m = p.subgradient_bound().unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x = random_point(&mut rng, 3);
            let y = random_point(&mut rng, 3);
            let g = p.gradient(&x);
            assert!(g.norm2() <= m + 1e-12);
            assert!(p.value(&y) >= p.value(&x) + g.dot(&(&y - &x)) - 1e-12);
        }
    }

    #[test]
    fn quadratic_rejects_asymmetric() {
        let q = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(Quadratic::new(q, Vector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn dataset_dimension_checks() {
        assert!(matches!(
            Dataset::new(Matrix::identity(2), Vector::zeros(3)),
            Err(UmdError::Dimension { .. })
        ));
    }
}
