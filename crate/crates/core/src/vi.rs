//! Unified mirror prox for monotone variational inequalities.
//!
//! Each step evaluates the operator twice: once at `x_t` to build the
//! extrapolated point `y_t = grad h*(zeta_t - gamma Phi(x_t))`, then at `y_t`
//! to drive a UMD step from `theta_t`. Mirror prox and dual extrapolation are
//! the two choices of `(zeta_t, theta_{t+1})` exposed by [`UmpOptions`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::divergence::fenchel_residual;
use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::{Matrix, Vector};
use crate::math;
use crate::mirror::Regularizer;
use crate::problems::{Problem, POWER_ITERATION_TOL};
use crate::solvers::{certify_umd_step, umd_step, DualChoice, RunOptions, UmdState};

/// A monotone map `Phi: X -> R^n`.
pub trait MonotoneOperator {
    fn dim(&self) -> usize;

    fn apply(&self, x: &Vector) -> Vector;

    /// Lipschitz constant w.r.t. the reference norm of the regularizer the
    /// operator is meant to be paired with, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> String {
        String::from("operator")
    }
}

impl<O: MonotoneOperator + ?Sized> MonotoneOperator for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &Vector) -> Vector {
        (**self).apply(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// `Phi(x) = M x + b`; monotone when `M + M^T` is positive semidefinite.
/// The Lipschitz constant is the spectral norm of `M` (L2).
#[derive(Debug, Clone)]
pub struct AffineOperator {
    m: Matrix,
    b: Vector,
    lipschitz: f64,
}

impl AffineOperator {
    pub fn new(m: Matrix, b: Vector) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(UmdError::Dimension {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        check_dim(m.rows(), b.len())?;
        let lipschitz = math::sqrt(m.gram_lambda_max(POWER_ITERATION_TOL));
        Ok(AffineOperator { m, b, lipschitz })
    }
}

impl MonotoneOperator for AffineOperator {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn apply(&self, x: &Vector) -> Vector {
        &self.m.mul_vec(x) + &self.b
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn name(&self) -> String {
        format!("affine({})", self.b.len())
    }
}

/// `Phi = grad f` for a convex problem; monotone by convexity.
pub struct GradientOperator<P>(pub P);

impl<P: Problem> MonotoneOperator for GradientOperator<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &Vector) -> Vector {
        self.0.gradient(x)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.0.smoothness().map(|c| c.value)
    }

    fn name(&self) -> String {
        format!("gradient of {}", self.0.name())
    }
}

/// How `zeta_t in dh(x_t)` is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaPolicy {
    /// `zeta_t = grad F(x_t)`; needs a mirror map.
    MirrorDescent,
    /// `zeta_t = theta_t`; always admissible.
    DualAveraging,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmpOptions {
    pub zeta: ZetaPolicy,
    pub theta_update: DualChoice,
    pub run: RunOptions,
}

impl UmpOptions {
    /// Classic mirror prox: `theta_t = zeta_t = grad F(x_t)`.
    pub fn mirror_prox() -> Self {
        UmpOptions {
            zeta: ZetaPolicy::MirrorDescent,
            theta_update: DualChoice::MirrorDescent,
            run: RunOptions::checked(),
        }
    }

    /// Dual extrapolation: `zeta_t = grad F(x_t)`, `theta` accumulates.
    pub fn dual_extrapolation() -> Self {
        UmpOptions {
            zeta: ZetaPolicy::MirrorDescent,
            theta_update: DualChoice::DualAveraging,
            run: RunOptions::checked(),
        }
    }
}

impl Default for UmpOptions {
    /// `zeta_t = theta_t` with DA updates; needs no mirror map.
    fn default() -> Self {
        UmpOptions {
            zeta: ZetaPolicy::DualAveraging,
            theta_update: DualChoice::DualAveraging,
            run: RunOptions::checked(),
        }
    }
}

/// Iteration `t` of a UMP run.
#[derive(Debug, Clone, PartialEq)]
pub struct UmpRecord {
    pub t: usize,
    pub x: Vector,
    pub y: Vector,
    pub theta: Vector,
    pub zeta: Vector,
    /// Fenchel-Young gap of `(x_t, zeta_t)`, then the variational residual
    /// `<zeta_t - theta_t, x_t> - min_X <zeta_t - theta_t, x>`, then the
    /// residuals of the transition `t -> t + 1`. `None` when not certified.
    pub residuals: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmpTrace {
    pub records: Vec<UmpRecord>,
    pub final_state: UmdState,
    /// `(1/T) sum y_t`.
    pub y_bar: Vector,
}

/// Runs `T` UMP steps with constant `gamma`.
#[allow(clippy::too_many_arguments)]
pub fn run_ump(
    op: &dyn MonotoneOperator,
    h: &Regularizer,
    set: &ConstraintSet,
    gamma: f64,
    horizon: usize,
    theta_1: &Vector,
    options: UmpOptions,
) -> Result<UmpTrace> {
    if horizon == 0 {
        return Err(UmdError::Argument("horizon T must be >= 1".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(UmdError::Argument(format!("step size must be positive, got {gamma}")));
    }
    check_dim(h.dim(), op.dim())?;
    check_dim(h.dim(), set.dim())?;
    check_dim(h.dim(), theta_1.len())?;
    let needs_map = options.zeta == ZetaPolicy::MirrorDescent
        || options.theta_update == DualChoice::MirrorDescent;
    if needs_map && !h.has_mirror_map() {
        return Err(UmdError::Unsupported(format!(
            "mirror-descent choices need a mirror map but {} has none",
            h.name()
        )));
    }
    let tol = options.run.tol;
    let mut state = UmdState {
        t: 1,
        x: h.grad_conjugate(theta_1),
        theta: theta_1.clone(),
    };
    let mut y_sum = Vector::zeros(h.dim());
    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let zeta = match options.zeta {
            ZetaPolicy::MirrorDescent => h.md_dual(&state.theta)?,
            ZetaPolicy::DualAveraging => state.theta.clone(),
        };
        let y = h.grad_conjugate(&zeta.axpy(-gamma, &op.apply(&state.x)));
        let xi = op.apply(&y).scale(-gamma);
        let next = umd_step(h, &state, &xi, options.theta_update)?;
        let residuals = if options.run.certify {
            let fenchel = fenchel_residual(h, &state.x, &zeta)?;
            let g = &zeta - &state.theta;
            let var = if g.iter().all(|v| *v == 0.0) {
                0.0
            } else {
                g.dot(&state.x) - set.support_min(&g)?.value
            };
            let c = certify_umd_step(h, set, &state, &xi, &next, tol)?;
            if !(fenchel <= tol && var <= tol && c.ok) {
                return Err(UmdError::Certification {
                    t,
                    residual_i: fenchel.max(c.residual_i),
                    residual_ii: var.max(c.residual_ii),
                });
            }
            Some([fenchel, var, c.residual_i, c.residual_ii])
        } else {
            None
        };
        y_sum = &y_sum + &y;
        records.push(UmpRecord {
            t,
            x: state.x,
            y,
            theta: state.theta,
            zeta,
            residuals,
        });
        state = next;
    }
    Ok(UmpTrace {
        records,
        final_state: state,
        y_bar: y_sum.scale(1.0 / horizon as f64),
    })
}

/// `max over probes x of <Phi(x), y_bar - x>`; `-inf` for no probes.
pub fn vi_gap(op: &dyn MonotoneOperator, y_bar: &Vector, probes: &[Vector]) -> f64 {
    probes
        .iter()
        .map(|x| op.apply(x).dot(&(y_bar - x)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// [`vi_gap`] over the vertices of a polytope; exact for operators that are
/// affine in `x` only when the gap is convex along the set, as for bilinear
/// saddles on simplex products.
pub fn vertex_gap(op: &dyn MonotoneOperator, set: &ConstraintSet, y_bar: &Vector) -> Result<f64> {
    let vs = set
        .vertices()
        .ok_or_else(|| UmdError::Unsupported(format!("{} has no vertex list", set.name())))?;
    Ok(vi_gap(op, y_bar, &vs))
}
