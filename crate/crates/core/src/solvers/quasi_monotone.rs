use alloc::vec::Vec;

use super::engine::{certify_or_abort, validate_run};
use super::step::umd_step;
use super::{Branch, DualChoice, RunOptions, StepSchedule, Trace, TraceRecord, UmdState};
use crate::error::Result;
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::mirror::Regularizer;
use crate::problems::Problem;

/// Quasi-monotone UMD: subgradients are taken at the running weighted
/// average `y_t`, and `y_t` itself is the output.
///
/// `y_1 = x_1`, `y_{t+1} = (1 - nu_t) y_t + nu_t x_{t+1}` with
/// `nu_t = gamma_{t+1} / sum_{s <= t+1} gamma_s`. Records carry `y_t` and
/// `f(y_t)`; `final_aux` is `y_{T+1}`.
#[allow(clippy::too_many_arguments)]
pub fn run_quasi_monotone(
    f: &dyn Problem,
    h: &Regularizer,
    set: &ConstraintSet,
    schedule: &StepSchedule,
    horizon: usize,
    theta_1: &Vector,
    choice: DualChoice,
    options: RunOptions,
) -> Result<Trace> {
    validate_run(f, h, set, schedule, horizon, theta_1)?;
    if choice == DualChoice::MirrorDescent {
        super::engine::require_mirror_map(h, "mirror-descent dual choice")?;
    }
    let mut state = UmdState {
        t: 1,
        x: h.grad_conjugate(theta_1),
        theta: theta_1.clone(),
    };
    let mut y = state.x.clone();
    let mut gamma_sum = schedule.gamma(1);
    let mut branch = Branch::None;
    let step_branch = match choice {
        DualChoice::DualAveraging => Branch::DaStep,
        DualChoice::MirrorDescent => Branch::MdChosen,
    };
    let mut records = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let xi = f.gradient(&y).scale(-schedule.gamma(t));
        let next = umd_step(h, &state, &xi, choice)?;
        let certificate = certify_or_abort(h, set, &state, &xi, &next, options)?;
        let g_next = schedule.gamma(t + 1);
        gamma_sum += g_next;
        let nu = g_next / gamma_sum;
        let y_next = y.scale(1.0 - nu).axpy(nu, &next.x);
        records.push(TraceRecord {
            t,
            x: state.x,
            theta: state.theta,
            xi,
            f_value: f.value(&y),
            branch,
            certificate,
            y: Some(y),
            z: None,
        });
        state = next;
        y = y_next;
        branch = step_branch;
    }
    let final_f = f.value(&y);
    Ok(Trace {
        records,
        final_state: state,
        final_branch: branch,
        final_f,
        final_aux: Some(y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{L1Distance, ZeroProblem};

    #[test]
    fn constant_steps_give_running_average() {
        let h = Regularizer::euclidean_ball(Vector::zeros(3), 1.0).unwrap();
        let set = h.domain();
        let f = L1Distance::new(Vector::from_slice(&[0.3, -0.2, 0.1]));
        let tr = run_quasi_monotone(
            &f,
            &h,
            &set,
            &StepSchedule::Constant(0.1),
            30,
            &Vector::from_slice(&[0.5, 0.5, 0.0]),
            DualChoice::DualAveraging,
            RunOptions::checked(),
        )
        .unwrap();
        let xs = tr.primal_points();
        for (i, r) in tr.records.iter().enumerate() {
            let mut mean = Vector::zeros(3);
            for x in &xs[..=i] {
                mean = &mean + *x;
            }
            mean = mean.scale(1.0 / (i + 1) as f64);
            assert!(r.y.as_ref().unwrap().distance(&mean) < 1e-12);
            assert!(set.contains(r.y.as_ref().unwrap(), 1e-12));
        }
    }

    #[test]
    fn zero_objective_keeps_y() {
        let h = Regularizer::entropy_simplex(4).unwrap();
        let set = h.domain();
        let theta = Vector::from_slice(&[0.1, 0.0, -1.0, 2.0]);
        let x1 = h.grad_conjugate(&theta);
        let tr = run_quasi_monotone(
            &ZeroProblem::new(4),
            &h,
            &set,
            &StepSchedule::Constant(1.0),
            10,
            &theta,
            DualChoice::MirrorDescent,
            RunOptions::checked(),
        )
        .unwrap();
        for r in &tr.records {
            assert!(r.y.as_ref().unwrap().distance(&x1) < 1e-12);
        }
    }
}
