use super::{Branch, Certificate, DualChoice, UmdState};
use crate::error::{check_dim, Result};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::mirror::Regularizer;
use crate::problems::Problem;

/// One UMD transition `(x', theta') in Pi_h(theta + xi)`.
///
/// `x' = grad h*(theta + xi)` in all cases; `choice` picks which admissible
/// dual is kept.
pub fn umd_step(h: &Regularizer, state: &UmdState, xi: &Vector, choice: DualChoice) -> Result<UmdState> {
    check_dim(h.dim(), xi.len())?;
    check_dim(h.dim(), state.theta.len())?;
    let target = &state.theta + xi;
    let x = h.grad_conjugate(&target);
    let theta = match choice {
        DualChoice::DualAveraging => target,
        DualChoice::MirrorDescent => h.md_dual(&target)?,
    };
    Ok(UmdState {
        t: state.t + 1,
        x,
        theta,
    })
}

/// Checks conditions (I) and (II) for the transition `prev -> next` driven
/// by `xi`.
///
/// `residual_i = ||x' - grad h*(theta')||_2`. With `g = theta' - theta - xi`,
/// `residual_ii = <g, x'> - min_X <g, x>`, which is `<= 0` exactly when
/// `<g, x - x'> >= 0` on `X`. DA steps give `g = 0` and `residual_ii = 0`.
/// Tolerances are absolute.
pub fn certify_umd_step(
    h: &Regularizer,
    set: &ConstraintSet,
    prev: &UmdState,
    xi: &Vector,
    next: &UmdState,
    tol: f64,
) -> Result<Certificate> {
    let n = set.dim();
    check_dim(n, prev.theta.len())?;
    check_dim(n, xi.len())?;
    check_dim(n, next.theta.len())?;
    check_dim(n, next.x.len())?;
    let residual_i = next.x.distance(&h.grad_conjugate(&next.theta));
    let g = &next.theta - &(&prev.theta + xi);
    let residual_ii = if g.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        g.dot(&next.x) - set.support_min(&g)?.value
    };
    Ok(Certificate {
        ok: residual_i <= tol && residual_ii <= tol,
        residual_i,
        residual_ii,
    })
}

/// The GoLD comparison at step `t` with current primal point `x_t`.
///
/// Candidates are `theta_md = grad F(x_t)` and `theta_da`, where
/// `x_t = grad h*(theta_da)`. Each is rolled
/// forward `gammas.len()` DA-style steps (`tau = 1` is plain GoLD) and the
/// one with the smaller objective at the end is kept. Ties go to MD.
pub fn gold_branch_choice(
    f: &dyn Problem,
    h: &Regularizer,
    x_t: &Vector,
    theta_da: &Vector,
    gammas: &[f64],
) -> Result<(Vector, Branch)> {
    let theta_md = h.md_dual(theta_da)?;
    let first_grad = f.gradient(x_t);
    let rollout = |theta: &Vector| {
        let mut acc = theta.axpy(-gammas[0], &first_grad);
        let mut x = h.grad_conjugate(&acc);
        for g in &gammas[1..] {
            acc = acc.axpy(-g, &f.gradient(&x));
            x = h.grad_conjugate(&acc);
        }
        f.value(&x)
    };
    let f_md = rollout(&theta_md);
    let f_da = rollout(theta_da);
    if f_md <= f_da {
        Ok((theta_md, Branch::MdChosen))
    } else {
        Ok((theta_da.clone(), Branch::DaChosen))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::UmdError;
    use crate::problems::FnProblem;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_slice(xs)
    }

    fn start(h: &Regularizer, theta: Vector) -> UmdState {
        UmdState {
            t: 1,
            x: h.grad_conjugate(&theta),
            theta,
        }
    }

    #[test]
    fn ball_endpoints_of_admissible_segment() {
        let h = Regularizer::euclidean_ball(Vector::zeros(2), 1.0).unwrap();
        let set = h.domain();
        let s = start(&h, Vector::zeros(2));
        let xi = v(&[2.5, 0.0]);
        let md = umd_step(&h, &s, &xi, DualChoice::MirrorDescent).unwrap();
        assert_eq!((md.x.clone(), md.theta.clone()), (v(&[1.0, 0.0]), v(&[1.0, 0.0])));
        let da = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        assert_eq!((da.x.clone(), da.theta.clone()), (v(&[1.0, 0.0]), v(&[2.5, 0.0])));
        let c = certify_umd_step(&h, &set, &s, &xi, &md, 1e-7).unwrap();
        // g = (-1.5, 0): <g, x'> = -1.5 and min over the ball is also -1.5.
        assert!(c.ok && c.residual_ii.abs() < 1e-15);
        let c = certify_umd_step(&h, &set, &s, &xi, &da, 1e-7).unwrap();
        assert!(c.ok && c.residual_ii == 0.0);
        // Any point of the segment between x' and theta + xi is admissible;
        // off the ray it is not.
        for lam in [0.0, 0.3, 1.0] {
            let th = v(&[1.0 + 1.5 * lam, 0.0]);
            let next = UmdState { t: 2, x: v(&[1.0, 0.0]), theta: th };
            assert!(certify_umd_step(&h, &set, &s, &xi, &next, 1e-12).unwrap().ok);
        }
        let off = UmdState { t: 2, x: v(&[1.0, 0.0]), theta: v(&[2.0, 0.5]) };
        assert!(!certify_umd_step(&h, &set, &s, &xi, &off, 1e-7).unwrap().ok);
    }

    #[test]
    fn segment_admissible_region() {
        let set = ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0]).unwrap();
        let h = Regularizer::euclidean(set.clone());
        let s = start(&h, Vector::zeros(2));
        let xi = v(&[-1.0, 0.5]);
        let da = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        assert_eq!((da.x.clone(), da.theta.clone()), (v(&[0.0, 0.0]), v(&[-1.0, 0.5])));
        assert!(certify_umd_step(&h, &set, &s, &xi, &da, 1e-7).unwrap().ok);
        let md = umd_step(&h, &s, &xi, DualChoice::MirrorDescent).unwrap();
        assert!(certify_umd_step(&h, &set, &s, &xi, &md, 1e-7).unwrap().ok);
        // Admissible duals: first coordinate in [-1, 0], second free.
        for (a, b) in [(-1.0, 7.0), (-0.5, -3.0), (0.0, 0.0), (-0.01, 100.0)] {
            let next = UmdState { t: 2, x: v(&[0.0, 0.0]), theta: v(&[a, b]) };
            let c = certify_umd_step(&h, &set, &s, &xi, &next, 1e-12).unwrap();
            assert!(c.ok, "({a}, {b}) should be admissible");
        }
        // Past -1 the variational condition fails; past 0 condition (I) does.
        for (a, b) in [(-1.5, 0.5), (-3.0, -2.0)] {
            let next = UmdState { t: 2, x: v(&[0.0, 0.0]), theta: v(&[a, b]) };
            let c = certify_umd_step(&h, &set, &s, &xi, &next, 1e-7).unwrap();
            assert!(!c.ok && c.residual_ii > 0.0 && c.residual_i == 0.0, "({a}, {b})");
        }
        for (a, b) in [(0.5, 0.5), (0.1, -2.0)] {
            let next = UmdState { t: 2, x: v(&[0.0, 0.0]), theta: v(&[a, b]) };
            let c = certify_umd_step(&h, &set, &s, &xi, &next, 1e-7).unwrap();
            assert!(!c.ok && c.residual_i > 0.0, "({a}, {b})");
        }
    }

    #[test]
    fn corrupted_dual_fails() {
        let set = ConstraintSet::segment_2d([0.0, 0.0], [1.0, 0.0]).unwrap();
        let h = Regularizer::euclidean(set.clone());
        let s = start(&h, Vector::zeros(2));
        let xi = v(&[-1.0, 0.5]);
        // Moving along the segment's normal stays admissible.
        let mut normal = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        normal.theta = &normal.theta + &v(&[0.0, 1.0]);
        assert!(certify_umd_step(&h, &set, &s, &xi, &normal, 1e-7).unwrap().ok);
        let mut bad = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        bad.theta = &bad.theta + &v(&[-1.0, 0.0]);
        let c = certify_umd_step(&h, &set, &s, &xi, &bad, 1e-7).unwrap();
        assert!(!c.ok && (c.residual_ii - 1.0).abs() < 1e-15);
        // Condition (I) broken directly.
        let mut bad = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        bad.x = v(&[0.5, 0.0]);
        assert!(certify_umd_step(&h, &set, &s, &xi, &bad, 1e-7).unwrap().residual_i > 0.4);
    }

    #[test]
    fn full_space_only_admits_da() {
        let h = Regularizer::euclidean_free(2);
        let set = h.domain();
        let s = start(&h, v(&[0.1, 0.2]));
        let xi = v(&[1.0, -1.0]);
        let md = umd_step(&h, &s, &xi, DualChoice::MirrorDescent).unwrap();
        let da = umd_step(&h, &s, &xi, DualChoice::DualAveraging).unwrap();
        assert_eq!(md, da);
        let mut bad = da.clone();
        bad.theta[0] += 1.0;
        bad.x[0] += 1.0;
        assert!(matches!(
            certify_umd_step(&h, &set, &s, &xi, &bad, 1e-7),
            Err(UmdError::Unbounded(_))
        ));
    }

    #[test]
    fn elastic_net_md_unsupported() {
        let h = Regularizer::elastic_net(2);
        let s = start(&h, v(&[3.0, 0.0]));
        assert!(matches!(
            umd_step(&h, &s, &v(&[1.0, 1.0]), DualChoice::MirrorDescent),
            Err(UmdError::Unsupported(_))
        ));
        let next = umd_step(&h, &s, &v(&[1.0, 1.0]), DualChoice::DualAveraging).unwrap();
        assert_eq!(next.x, v(&[1.5, 0.0]));
    }

    fn quad_toward(target: [f64; 2]) -> FnProblem {
        let c = v(&target);
        let c2 = c.clone();
        FnProblem::new(2, move |x| 0.5 * (x - &c).dot(&(x - &c)), move |x| x - &c2)
    }

    #[test]
    fn gold_tie_goes_to_md() {
        let h = Regularizer::euclidean_ball(Vector::zeros(2), 1.0).unwrap();
        let f = quad_toward([0.1, 0.0]);
        // Interior iterate: theta_md = theta_da = x_t.
        let x = v(&[0.3, 0.2]);
        let (th, b) = gold_branch_choice(&f, &h, &x, &x, &[0.5]).unwrap();
        assert_eq!((th, b), (x.clone(), Branch::MdChosen));
        let (_, b) = gold_branch_choice(&f, &h, &x, &x, &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!(b, Branch::MdChosen);
    }

    #[test]
    fn gold_picks_better_candidate() {
        let h = Regularizer::euclidean_ball(Vector::zeros(2), 1.0).unwrap();
        let x = v(&[1.0, 0.0]);
        let theta_da = v(&[5.0, 0.0]);
        // Optimum in the interior: MD (theta = x) leaves the boundary sooner.
        let f = quad_toward([0.0, 0.5]);
        let gamma = 0.5;
        let eval = |th: &Vector| f.value(&h.grad_conjugate(&th.axpy(-gamma, &f.gradient(&x))));
        assert!(eval(&x) < eval(&theta_da));
        let (_, b) = gold_branch_choice(&f, &h, &x, &theta_da, &[gamma]).unwrap();
        assert_eq!(b, Branch::MdChosen);
        // Optimum on the boundary with a long step: MD overshoots along the
        // sphere while the accumulated DA dual damps the move.
        let f = quad_toward([0.0, 2.0]);
        let x = v(&[0.6, 0.8]);
        let theta_da = v(&[2.4, 3.2]);
        let gamma = 3.0;
        let eval = |th: &Vector| f.value(&h.grad_conjugate(&th.axpy(-gamma, &f.gradient(&x))));
        assert!(eval(&theta_da) < eval(&x));
        let (th, b) = gold_branch_choice(&f, &h, &x, &theta_da, &[gamma]).unwrap();
        assert_eq!((th, b), (theta_da.clone(), Branch::DaChosen));
    }

    #[test]
    fn gold_needs_mirror_map() {
        let h = Regularizer::elastic_net(2);
        let f = quad_toward([0.0, 0.0]);
        assert!(matches!(
            gold_branch_choice(&f, &h, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), &[1.0]),
            Err(UmdError::Unsupported(_))
        ));
    }
}
