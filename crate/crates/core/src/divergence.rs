//! Generalized Bregman divergences anchored at an arbitrary subgradient.

use alloc::format;

use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::math;
use crate::mirror::Regularizer;

/// `D_h(x', x; theta) = h(x') - h(x) - <theta, x' - x>`.
///
/// `theta` is meant to be a subgradient of `h` at `x`; only `x, x' in dom h`
/// is checked. Nonnegative whenever `theta` is in `dh(x)`.
pub fn generalized_bregman(h: &Regularizer, x_prime: &Vector, x: &Vector, theta: &Vector) -> Result<f64> {
    check_dim(h.dim(), x_prime.len())?;
    check_dim(h.dim(), x.len())?;
    check_dim(h.dim(), theta.len())?;
    let hp = h.value(x_prime);
    if !hp.is_finite() {
        return Err(UmdError::Domain(format!("x' outside dom {}", h.name())));
    }
    let hx = h.value(x);
    if !hx.is_finite() {
        return Err(UmdError::Domain(format!("x outside dom {}", h.name())));
    }
    Ok(hp - hx - theta.dot(&(x_prime - x)))
}

/// `D_{h*}(zeta', zeta) = h*(zeta') - h*(zeta) - <grad h*(zeta), zeta' - zeta>`.
pub fn conjugate_bregman(h: &Regularizer, zeta_prime: &Vector, zeta: &Vector) -> Result<f64> {
    check_dim(h.dim(), zeta_prime.len())?;
    check_dim(h.dim(), zeta.len())?;
    let g = h.grad_conjugate(zeta);
    Ok(h.conjugate(zeta_prime) - h.conjugate(zeta) - g.dot(&(zeta_prime - zeta)))
}

/// Fenchel-Young gap `h(x) + h*(theta) - <theta, x>`, zero iff `theta in dh(x)`.
pub fn fenchel_residual(h: &Regularizer, x: &Vector, theta: &Vector) -> Result<f64> {
    check_dim(h.dim(), x.len())?;
    check_dim(h.dim(), theta.len())?;
    let hx = h.value(x);
    if !hx.is_finite() {
        return Err(UmdError::Domain(format!("x outside dom {}", h.name())));
    }
    Ok(hx + h.conjugate(theta) - theta.dot(x))
}

/// `max over dom h of D_h(x, x1; theta1)`.
///
/// Exact in every supported case: `D_h(., x1; theta1)` is convex, so on
/// polytopes the max is attained at a vertex; the Euclidean ball and box
/// have closed forms; products split blockwise. Unbounded domains error.
pub fn max_divergence(h: &Regularizer, x1: &Vector, theta1: &Vector) -> Result<f64> {
    check_dim(h.dim(), x1.len())?;
    check_dim(h.dim(), theta1.len())?;
    match h {
        Regularizer::Product(parts) => {
            let dims: alloc::vec::Vec<usize> = parts.iter().map(|p| p.dim()).collect();
            let xs = x1.split(&dims);
            let ts = theta1.split(&dims);
            let mut total = 0.0;
            for ((p, x), t) in parts.iter().zip(&xs).zip(&ts) {
                total += max_divergence(p, x, t)?;
            }
            Ok(total)
        }
        Regularizer::Euclidean {
            set: ConstraintSet::EuclideanBall { center, radius },
        } => {
            // D = 1/2 ||x - theta1||^2 - 1/2 ||x1 - theta1||^2 on the ball.
            let far = center.distance(theta1) + radius;
            let near = x1.distance(theta1);
            Ok(0.5 * far * far - 0.5 * near * near)
        }
        Regularizer::Euclidean {
            set: ConstraintSet::Box { lower, upper },
        } => {
            let base = 0.5 * x1.dot(x1) - theta1.dot(x1);
            let mut total = 0.0;
            for i in 0..x1.len() {
                let at = |v: f64| 0.5 * v * v - theta1[i] * v;
                total += at(lower[i]).max(at(upper[i]));
            }
            Ok(total - base)
        }
        _ => {
            let dom = h.domain();
            let vertices = dom.vertices().ok_or_else(|| {
                UmdError::Unbounded(format!("no exact divergence maximum over {}", dom.name()))
            })?;
            let mut best = f64::NEG_INFINITY;
            for v in &vertices {
                best = best.max(generalized_bregman(h, v, x1, theta1)?);
            }
            Ok(best)
        }
    }
}

/// `sqrt(2 max D_h(x, x1; theta1))`, the diameter-like constant of the
/// nonsmooth step-size rule.
pub fn omega_radius(h: &Regularizer, x1: &Vector, theta1: &Vector) -> Result<f64> {
    Ok(math::sqrt(2.0 * max_divergence(h, x1, theta1)?.max(0.0)))
}
