use alloc::format;

use super::Problem;
use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::math;

/// Relative tolerance for smoothness constants obtained by power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-8;

/// Best objective value seen over `budget` projected-gradient steps with
/// `gamma = 1/L`, started from the set's center.
pub fn estimate_f_star(problem: &dyn Problem, set: &ConstraintSet, budget: usize) -> Result<f64> {
    check_dim(set.dim(), problem.dim())?;
    let l = problem
        .smoothness()
        .ok_or_else(|| UmdError::Argument(format!("{} declares no smoothness constant", problem.name())))?
        .value;
    let mut x = set.center();
    let mut best = problem.value(&x);
    if l <= 0.0 {
        return Ok(best);
    }
    let step = 1.0 / l;
    for _ in 0..budget {
        x = set.project(&x.axpy(-step, &problem.gradient(&x)));
        let f = problem.value(&x);
        if f < best {
            best = f;
        }
    }
    Ok(best)
}

/// Max over coordinates of `|g_i - fd_i| / max(1, |g_i|)` with central
/// differences of width `h_fd`.
pub fn check_gradient(problem: &dyn Problem, x: &Vector, h_fd: f64) -> f64 {
    let g = problem.gradient(x);
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut plus = x.clone();
        plus[i] += h_fd;
        let mut minus = x.clone();
        minus[i] -= h_fd;
        let fd = (problem.value(&plus) - problem.value(&minus)) / (2.0 * h_fd);
        let err = math::abs(g[i] - fd) / math::abs(g[i]).max(1.0);
        worst = worst.max(err);
    }
    worst
}
