#![cfg_attr(not(test), no_std)]

//! Unified mirror descent (UMD) for constrained first-order optimization.
//!
//! A UMD trajectory is a sequence of primal/dual pairs `(x_t, theta_t)` such
//! that `x_t = grad h*(theta_t)` and the dual update satisfies a variational
//! condition on the feasible set. Mirror descent and dual averaging are the two
//! extreme admissible dual choices; the GoLD policies pick between them greedily
//! by comparing objective values.
//!
//! The crate is `no_std` (with `alloc`) and contains only the numerical core:
//!
//! - [`linalg`]: dense vectors, norms and dual norms, a small row-major matrix.
//! - [`geometry`]: feasible sets with projection and linear-minimization oracles.
//! - [`mirror`]: regularizers, conjugate gradients, mirror-map subgradients and
//!   Bregman projections.
//! - [`divergence`]: the generalized Bregman divergence `D_h(x', x; theta)`.
//! - [`solvers`]: the UMD engine, dual policies, step certification, averaging,
//!   quasi-monotone and accelerated variants.
//! - [`vi`]: unified mirror prox for monotone variational inequalities.
//! - [`online`]: the online linear optimization game loop and regret.
//! - [`problems`]: first-order oracles and synthetic instances.
//! - [`selftest`]: randomized invariant checks runnable outside the test harness.

extern crate alloc;

pub mod divergence;
pub mod error;
pub mod geometry;
pub mod linalg;
pub(crate) mod math;
pub mod mirror;
pub mod online;
pub mod problems;
pub mod selftest;
pub mod solvers;
pub mod vi;

pub use crate::divergence::{conjugate_bregman, fenchel_residual, generalized_bregman};
pub use crate::error::{Result, UmdError};
pub use crate::geometry::{ConstraintSet, Support};
pub use crate::linalg::{Matrix, NormTag, ReferenceNorm, Vector};
pub use crate::mirror::{bregman_project, MirrorMap, Regularizer};
pub use crate::problems::{Dataset, Problem};
pub use crate::solvers::{
    Branch, Certificate, DualChoice, DualPolicy, StepSchedule, Trace, TraceRecord, UmdState,
};
