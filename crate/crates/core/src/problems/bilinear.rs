use alloc::format;
use alloc::string::String;
use alloc::vec;

use crate::error::{Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::{Matrix, Vector};
use crate::vi::MonotoneOperator;

/// The saddle operator of `min_u max_v u^T A v` over `Simplex(m) x Simplex(n)`:
/// `Phi(u, v) = (A v, -A^T u)`.
#[derive(Debug, Clone)]
pub struct BilinearSaddle {
    a: Matrix,
}

pub fn make_bilinear_saddle(payoff: Matrix) -> Result<BilinearSaddle> {
    if payoff.rows() == 0 || payoff.cols() == 0 {
        return Err(UmdError::Dimension {
            expected: 1,
            got: 0,
        });
    }
    if payoff.data().iter().any(|v| !v.is_finite()) {
        return Err(UmdError::Argument("payoff entries must be finite".into()));
    }
    Ok(BilinearSaddle { a: payoff })
}

impl BilinearSaddle {
    pub fn payoff(&self) -> &Matrix {
        &self.a
    }

    /// `Simplex(m) x Simplex(n)`.
    pub fn set(&self) -> ConstraintSet {
        ConstraintSet::Product(vec![
            ConstraintSet::Simplex(self.a.rows()),
            ConstraintSet::Simplex(self.a.cols()),
        ])
    }

    /// Splits a joint point into `(u, v)`.
    pub fn split(&self, w: &Vector) -> (Vector, Vector) {
        let mut parts = w.split(&[self.a.rows(), self.a.cols()]);
        let v = parts.pop().expect("two blocks");
        let u = parts.pop().expect("two blocks");
        (u, v)
    }
}

impl MonotoneOperator for BilinearSaddle {
    fn dim(&self) -> usize {
        self.a.rows() + self.a.cols()
    }

    fn apply(&self, w: &Vector) -> Vector {
        let (u, v) = self.split(w);
        Vector::concat(&[self.a.mul_vec(&v), -&self.a.tr_mul_vec(&u)])
    }

    /// `max |A_ij|`, w.r.t. the product of L1 norms.
    fn lipschitz(&self) -> Option<f64> {
        Some(self.a.max_abs())
    }

    fn name(&self) -> String {
        format!("bilinear-saddle({}x{})", self.a.rows(), self.a.cols())
    }
}
