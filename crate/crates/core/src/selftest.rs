//! Randomized invariant checks that can run outside `cargo test`.
//!
//! Each check draws its instances from a seeded stream and reports the worst
//! slack it saw, so a binary can print a compact health report.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::divergence::{conjugate_bregman, fenchel_residual, generalized_bregman};
use crate::error::Result;
use crate::geometry::ConstraintSet;
use crate::linalg::{Matrix, Vector};
use crate::mirror::Regularizer;
use crate::problems::{make_bilinear_saddle, random_constrained_quadratic, Problem};
use crate::solvers::{aumd_coefficients, run_umd, umd_step, DualChoice, DualPolicy, RunOptions, StepSchedule, Trace, UmdState};
use crate::vi::MonotoneOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_slack(name: &'static str, worst: f64, tol: f64) -> Self {
        CheckOutcome {
            name,
            passed: worst <= tol,
            detail: format!("worst violation {worst:.3e} (tolerance {tol:.0e})"),
        }
    }

    fn from_error(name: &'static str, err: crate::error::UmdError) -> Self {
        CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {err}"),
        }
    }
}

/// Worst violations of the two three-point inequalities along a trajectory
/// of UMD states driven by `xis`, over the given comparators.
///
/// Returns `(three_point, three_point_regret)`; both should be `<= 0` up to
/// roundoff.
pub fn three_point_violations(
    h: &Regularizer,
    states: &[UmdState],
    xis: &[Vector],
    comparators: &[Vector],
) -> Result<(f64, f64)> {
    let mut worst = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (t, xi) in xis.iter().enumerate() {
        let (cur, next) = (&states[t], &states[t + 1]);
        let d_step = generalized_bregman(h, &next.x, &cur.x, &cur.theta)?;
        let d_conj = conjugate_bregman(h, &(&cur.theta + xi), &cur.theta)?;
        for x in comparators {
            let d_now = generalized_bregman(h, x, &cur.x, &cur.theta)?;
            let d_next = generalized_bregman(h, x, &next.x, &next.theta)?;
            let lhs = xi.dot(&(x - &next.x));
            worst.0 = worst.0.max(lhs - (d_now - d_next - d_step));
            let lhs = xi.dot(&(x - &cur.x));
            worst.1 = worst.1.max(lhs - (d_now - d_next + d_conj));
        }
    }
    Ok(worst)
}

/// The states `(x_t, theta_t)` for `t = 1..=T+1` of a trace.
pub fn trace_states(trace: &Trace) -> Vec<UmdState> {
    trace
        .records
        .iter()
        .map(|r| UmdState {
            t: r.t,
            x: r.x.clone(),
            theta: r.theta.clone(),
        })
        .chain(core::iter::once(trace.final_state.clone()))
        .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_vec((0..n).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
}

fn check_three_point(rng: &mut ChaCha8Rng) -> Result<f64> {
    let regs = vec![
        Regularizer::euclidean(ConstraintSet::centered_ball(3, 1.0)?),
        Regularizer::euclidean(ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0])?),
        Regularizer::entropy_simplex(4)?,
    ];
    let mut worst = f64::NEG_INFINITY;
    for h in &regs {
        let set = h.domain();
        for choice in [DualChoice::DualAveraging, DualChoice::MirrorDescent] {
            let theta = random_vector(rng, h.dim(), 1.0);
            let mut states = vec![UmdState {
                t: 1,
                x: h.grad_conjugate(&theta),
                theta,
            }];
            let mut xis = Vec::new();
            for _ in 0..20 {
                let xi = random_vector(rng, h.dim(), 2.0);
                let next = umd_step(h, states.last().expect("nonempty"), &xi, choice)?;
                states.push(next);
                xis.push(xi);
            }
            let comps: Vec<Vector> = (0..10).map(|_| set.sample(rng)).collect();
            let (a, b) = three_point_violations(h, &states, &xis, &comps)?;
            worst = worst.max(a).max(b);
        }
    }
    Ok(worst)
}

fn check_gold_certified(rng: &mut ChaCha8Rng) -> Result<f64> {
    let (q, ball) = random_constrained_quadratic(rng.random(), 6, 1.0);
    let h = Regularizer::euclidean(ball.clone());
    let l = q.smoothness().map(|c| c.value).unwrap_or(1.0);
    let mut worst = f64::NEG_INFINITY;
    for policy in [
        DualPolicy::Gold { k: 1 },
        DualPolicy::Gold { k: 5 },
        DualPolicy::GoldLookahead { k: 5, tau: 2 },
    ] {
        for gamma in [0.5 / l, 5.0 / l] {
            let tr = run_umd(
                &q,
                &h,
                &ball,
                policy,
                &StepSchedule::Constant(gamma),
                60,
                &Vector::zeros(6),
                RunOptions::checked(),
            )?;
            let (a, b) = tr.worst_residuals();
            worst = worst.max(a).max(b);
        }
    }
    Ok(worst)
}

fn check_full_space_coincidence(rng: &mut ChaCha8Rng) -> Result<f64> {
    let h = Regularizer::euclidean_free(5);
    let set = h.domain();
    let q = random_constrained_quadratic(rng.random(), 5, 1.0).0;
    let l = q.smoothness().map(|c| c.value).unwrap_or(1.0);
    let run = |p| {
        run_umd(&q, &h, &set, p, &StepSchedule::Constant(1.0 / l), 50, &Vector::zeros(5), RunOptions::checked())
    };
    let md = run(DualPolicy::MirrorDescent)?;
    let da = run(DualPolicy::DualAveraging)?;
    Ok(md
        .records
        .iter()
        .zip(&da.records)
        .map(|(a, b)| a.x.distance(&b.x).max(a.theta.distance(&b.theta)))
        .fold(0.0, f64::max))
}

fn check_entropy_coincidence(rng: &mut ChaCha8Rng) -> Result<f64> {
    let h = Regularizer::entropy_simplex(5)?;
    let theta = random_vector(rng, 5, 1.0);
    let mut md = UmdState { t: 1, x: h.grad_conjugate(&theta), theta: theta.clone() };
    let mut da = md.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let xi = random_vector(rng, 5, 1.0);
        md = umd_step(&h, &md, &xi, DualChoice::MirrorDescent)?;
        da = umd_step(&h, &da, &xi, DualChoice::DualAveraging)?;
        worst = worst.max(md.x.distance(&da.x));
    }
    Ok(worst)
}

fn check_fenchel(rng: &mut ChaCha8Rng) -> Result<f64> {
    let regs = vec![
        Regularizer::euclidean(ConstraintSet::boxed(Vector::filled(3, -1.0), Vector::filled(3, 2.0))?),
        Regularizer::entropy_simplex(3)?,
        Regularizer::elastic_net(3),
    ];
    let mut worst: f64 = 0.0;
    for h in &regs {
        for _ in 0..100 {
            let theta = random_vector(rng, 3, 5.0);
            let x = h.grad_conjugate(&theta);
            worst = worst.max(crate::math::abs(fenchel_residual(h, &x, &theta)?));
        }
    }
    Ok(worst)
}

fn check_aumd_identities(rng: &mut ChaCha8Rng) -> Result<f64> {
    let k = rng.random_range(0.5..2.0);
    let l = rng.random_range(0.1..10.0);
    let (gammas, nus) = aumd_coefficients(k, l, 200)?;
    let mut sum = 0.0;
    let mut worst: f64 = 0.0;
    for (g, nu) in gammas.iter().zip(&nus) {
        sum += g;
        worst = worst.max(crate::math::abs(g / nu - sum) / sum);
    }
    Ok(worst)
}

fn check_bilinear_monotone(rng: &mut ChaCha8Rng) -> Result<f64> {
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let op = make_bilinear_saddle(Matrix::from_rows(&rows)?)?;
    let set = op.set();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = set.sample(rng);
        let b = set.sample(rng);
        let m = (&op.apply(&a) - &op.apply(&b)).dot(&(&a - &b));
        worst = worst.max(-m);
    }
    Ok(worst)
}

/// Runs every check with instances derived from `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    type Check = fn(&mut ChaCha8Rng) -> Result<f64>;
    let checks: [(&'static str, Check, f64); 7] = [
        ("three-point inequalities", check_three_point, 1e-7),
        ("GoLD steps certify", check_gold_certified, 1e-7),
        ("MD equals DA on the full space", check_full_space_coincidence, 1e-10),
        ("entropy MD and DA primal coincidence", check_entropy_coincidence, 1e-8),
        ("Fenchel-Young equality at grad h*", check_fenchel, 1e-10),
        ("accelerated coefficient identity", check_aumd_identities, 1e-9),
        ("bilinear saddle monotonicity", check_bilinear_monotone, 1e-9),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(i, (name, check, tol))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            match check(&mut rng) {
                Ok(worst) => CheckOutcome::from_slack(name, worst, *tol),
                Err(e) => CheckOutcome::from_error(name, e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for seed in [0, 1, 42] {
            for outcome in run_all(seed) {
                assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
            }
        }
    }
}
