//! First-order problem oracles and instance generators.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;

use crate::error::{Result, UmdError};
use crate::linalg::{Matrix, NormTag, Vector};

mod bilinear;
mod objectives;
mod reference;
mod synthetic;

pub use bilinear::{make_bilinear_saddle, BilinearSaddle};
pub use objectives::{
    make_least_squares, make_logistic, FnProblem, L1Distance, LeastSquares, Logistic, Quadratic,
    ZeroProblem,
};
pub use reference::{check_gradient, estimate_f_star, POWER_ITERATION_TOL};
pub use synthetic::{random_constrained_quadratic, synthetic_least_squares};

/// A regularity constant together with the norm it is measured in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub value: f64,
    pub norm: NormTag,
}

impl Constant {
    pub fn new(value: f64, norm: NormTag) -> Self {
        Constant { value, norm }
    }
}

/// A convex objective with a first-order oracle.
///
/// Oracles are immutable; evaluation must be reentrant.
pub trait Problem {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    /// Gradient where differentiable, otherwise one fixed element of the
    /// subdifferential (documented per implementation).
    fn gradient(&self, x: &Vector) -> Vector;

    /// `L` with `||grad f(x) - grad f(x')||_* <= L ||x - x'||`.
    fn smoothness(&self) -> Option<Constant> {
        None
    }

    /// `M` with `||f'(x)||_* <= M`.
    fn subgradient_bound(&self) -> Option<Constant> {
        None
    }

    fn name(&self) -> String {
        String::from("problem")
    }
}

impl<P: Problem + ?Sized> Problem for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn smoothness(&self) -> Option<Constant> {
        (**self).smoothness()
    }
    fn subgradient_bound(&self) -> Option<Constant> {
        (**self).subgradient_bound()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<P: Problem + ?Sized> Problem for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn smoothness(&self) -> Option<Constant> {
        (**self).smoothness()
    }
    fn subgradient_bound(&self) -> Option<Constant> {
        (**self).subgradient_bound()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// A design matrix with one target per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    targets: Vector,
}

impl Dataset {
    pub fn new(features: Matrix, targets: Vector) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(UmdError::Dimension {
                expected: features.rows(),
                got: targets.len(),
            });
        }
        if features.rows() == 0 || features.cols() == 0 {
            return Err(UmdError::Argument("dataset needs at least one row and one column".into()));
        }
        if features.data().iter().any(|v| !v.is_finite()) || !targets.is_finite() {
            return Err(UmdError::Argument("dataset entries must be finite".into()));
        }
        Ok(Dataset { features, targets })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn targets(&self) -> &Vector {
        &self.targets
    }

    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_count(&self) -> usize {
        self.features.cols()
    }

    pub fn describe(&self) -> String {
        format!("{} samples x {} features", self.samples(), self.feature_count())
    }
}
