use alloc::format;
use alloc::vec::Vec;

use super::step::{certify_umd_step, gold_branch_choice};
use super::{Branch, DualPolicy, RunOptions, StepSchedule, Trace, TraceRecord, UmdState};
use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::mirror::Regularizer;
use crate::problems::Problem;

pub(crate) fn validate_run(
    f: &dyn Problem,
    h: &Regularizer,
    set: &ConstraintSet,
    schedule: &StepSchedule,
    horizon: usize,
    theta_1: &Vector,
) -> Result<()> {
    if horizon == 0 {
        return Err(UmdError::Argument("horizon T must be >= 1".into()));
    }
    check_dim(h.dim(), f.dim())?;
    check_dim(h.dim(), set.dim())?;
    check_dim(h.dim(), theta_1.len())?;
    if !theta_1.is_finite() {
        return Err(UmdError::Argument("theta_1 must be finite".into()));
    }
    schedule.validate()
}

pub(crate) fn require_mirror_map(h: &Regularizer, what: &str) -> Result<()> {
    if h.has_mirror_map() {
        Ok(())
    } else {
        Err(UmdError::Unsupported(format!(
            "{what} needs a mirror map but {} has none",
            h.name()
        )))
    }
}

pub(crate) fn certify_or_abort(
    h: &Regularizer,
    set: &ConstraintSet,
    prev: &UmdState,
    xi: &Vector,
    next: &UmdState,
    options: RunOptions,
) -> Result<Option<super::Certificate>> {
    if !options.certify {
        return Ok(None);
    }
    let c = certify_umd_step(h, set, prev, xi, next, options.tol)?;
    if !c.ok {
        return Err(UmdError::Certification {
            t: prev.t,
            residual_i: c.residual_i,
            residual_ii: c.residual_ii,
        });
    }
    Ok(Some(c))
}

/// Runs `T` steps of UMD with `xi_t = -gamma_t f'(x_t)`.
///
/// GoLD comparisons happen when choosing `theta_{t+1}` for `t + 1 <= T`;
/// the final dual `theta_{T+1}` is never compared since no step uses it.
#[allow(clippy::too_many_arguments)]
pub fn run_umd(
    f: &dyn Problem,
    h: &Regularizer,
    set: &ConstraintSet,
    policy: DualPolicy,
    schedule: &StepSchedule,
    horizon: usize,
    theta_1: &Vector,
    options: RunOptions,
) -> Result<Trace> {
    validate_run(f, h, set, schedule, horizon, theta_1)?;
    policy.validate()?;
    if policy.needs_mirror_map() {
        require_mirror_map(h, &policy.label())?;
    }
    let mut state = UmdState {
        t: 1,
        x: h.grad_conjugate(theta_1),
        theta: theta_1.clone(),
    };
    let mut branch = Branch::None;
    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let gamma = schedule.gamma(t);
        let xi = f.gradient(&state.x).scale(-gamma);
        let f_value = f.value(&state.x);
        let target = &state.theta + &xi;
        let x_next = h.grad_conjugate(&target);
        let (theta_next, next_branch) = match policy {
            DualPolicy::DualAveraging => (target, Branch::DaStep),
            DualPolicy::MirrorDescent => (h.md_dual(&target)?, Branch::MdChosen),
            DualPolicy::Gold { .. } | DualPolicy::GoldLookahead { .. } => {
                if t < horizon && policy.compares_at(t + 1) {
                    let (_, tau) = policy.gold_params().unwrap_or((1, 1));
                    let gammas: Vec<f64> = (t + 1..t + 1 + tau).map(|s| schedule.gamma(s)).collect();
                    gold_branch_choice(f, h, &x_next, &target, &gammas)?
                } else {
                    (target, Branch::DaStep)
                }
            }
        };
        let next = UmdState {
            t: t + 1,
            x: x_next,
            theta: theta_next,
        };
        let certificate = certify_or_abort(h, set, &state, &xi, &next, options)?;
        records.push(TraceRecord {
            t,
            x: state.x,
            theta: state.theta,
            xi,
            f_value,
            branch,
            certificate,
            y: None,
            z: None,
        });
        state = next;
        branch = next_branch;
    }
    let final_f = f.value(&state.x);
    Ok(Trace {
        records,
        final_state: state,
        final_branch: branch,
        final_f,
        final_aux: None,
    })
}

/// `sum gamma_t x_t / sum gamma_t` over the `T` recorded iterates.
pub fn averaged_iterate(trace: &Trace, schedule: &StepSchedule) -> Result<Vector> {
    let first = trace
        .records
        .first()
        .ok_or_else(|| UmdError::Argument("empty trace".into()))?;
    let mut acc = Vector::zeros(first.x.len());
    let mut total = 0.0;
    for r in &trace.records {
        let g = schedule.gamma(r.t);
        acc = acc.axpy(g, &r.x);
        total += g;
    }
    Ok(acc.scale(1.0 / total))
}
