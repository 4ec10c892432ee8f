use alloc::vec::Vec;

use super::engine::{certify_or_abort, validate_run};
use super::step::umd_step;
use super::{Branch, DualChoice, RunOptions, StepSchedule, Trace, TraceRecord, UmdState};
use crate::error::{Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::math;
use crate::mirror::Regularizer;
use crate::problems::Problem;

/// Step sizes and mixing weights of the accelerated scheme.
///
/// `gamma_1 = K/L`, `gamma_{t+1} = (K/2L)(1 + sqrt(1 + (2 L gamma_t / K)^2))`,
/// `nu_t = K / (L gamma_t)`. Note `nu_1 = 1`.
pub fn aumd_coefficients(k: f64, l: f64, horizon: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(k > 0.0 && k.is_finite()) || !(l > 0.0 && l.is_finite()) {
        return Err(UmdError::Argument(alloc::format!(
            "accelerated coefficients need K, L > 0, got K = {k}, L = {l}"
        )));
    }
    let mut gammas = Vec::with_capacity(horizon);
    let mut gamma = k / l;
    for _ in 0..horizon {
        gammas.push(gamma);
        let r = 2.0 * l * gamma / k;
        gamma = k / (2.0 * l) * (1.0 + math::sqrt(1.0 + r * r));
    }
    let nus = gammas.iter().map(|g| k / (l * g)).collect();
    Ok((gammas, nus))
}

/// Accelerated UMD with the DA dual choice.
///
/// Records carry `y_t`, `z_t` and `f(y_t)`; `final_aux` is `z_{T+1}` and
/// `final_f = f(z_{T+1})`.
#[allow(clippy::too_many_arguments)]
pub fn run_aumd(
    f: &dyn Problem,
    h: &Regularizer,
    set: &ConstraintSet,
    k: f64,
    l: f64,
    horizon: usize,
    theta_1: &Vector,
    options: RunOptions,
) -> Result<Trace> {
    let (gammas, nus) = aumd_coefficients(k, l, horizon)?;
    validate_run(f, h, set, &StepSchedule::List(gammas.clone()), horizon, theta_1)?;
    let mut state = UmdState {
        t: 1,
        x: h.grad_conjugate(theta_1),
        theta: theta_1.clone(),
    };
    let mut z = state.x.clone();
    let mut branch = Branch::None;
    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let (gamma, nu) = (gammas[t - 1], nus[t - 1]);
        let y = z.scale(1.0 - nu).axpy(nu, &state.x);
        let xi = f.gradient(&y).scale(-gamma);
        let next = umd_step(h, &state, &xi, DualChoice::DualAveraging)?;
        let certificate = certify_or_abort(h, set, &state, &xi, &next, options)?;
        let z_next = y.axpy(nu, &(&next.x - &state.x));
        records.push(TraceRecord {
            t,
            x: state.x,
            theta: state.theta,
            xi,
            f_value: f.value(&y),
            branch,
            certificate,
            y: Some(y),
            z: Some(z),
        });
        state = next;
        z = z_next;
        branch = Branch::DaStep;
    }
    let final_f = f.value(&z);
    Ok(Trace {
        records,
        final_state: state,
        final_branch: branch,
        final_f,
        final_aux: Some(z),
    })
}
