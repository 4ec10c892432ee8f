//! Online linear optimization with UMD as the decision maker.
//!
//! Each round the player commits to `x_t`, nature reveals a payoff vector
//! `zeta_t` (to be maximized), and the player steps with `xi_t = eta zeta_t`.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use crate::divergence::max_divergence;
use crate::error::{check_dim, Result, UmdError};
use crate::geometry::ConstraintSet;
use crate::linalg::Vector;
use crate::mirror::Regularizer;
use crate::solvers::{certify_umd_step, umd_step, Branch, DualChoice, DualPolicy, RunOptions, Trace, TraceRecord, UmdState};

/// Nature's strategy. `payoff` sees the plays `x_1..x_t` and the earlier
/// payoffs `zeta_1..zeta_{t-1}`.
pub trait Adversary {
    fn dim(&self) -> usize;

    fn payoff(&mut self, plays: &[Vector], payoffs: &[Vector]) -> Vector;

    /// `M` with `||zeta_t||_* <= M`.
    fn bound(&self) -> f64;
}

/// `zeta_t = 0`.
#[derive(Debug, Clone)]
pub struct ZeroAdversary(pub usize);

impl Adversary for ZeroAdversary {
    fn dim(&self) -> usize {
        self.0
    }
    fn payoff(&mut self, _: &[Vector], _: &[Vector]) -> Vector {
        Vector::zeros(self.0)
    }
    fn bound(&self) -> f64 {
        0.0
    }
}

/// `zeta_t = c`. The bound is supplied by the caller since it depends on the
/// dual norm in use.
#[derive(Debug, Clone)]
pub struct FixedAdversary {
    pub payoff: Vector,
    pub bound: f64,
}

impl Adversary for FixedAdversary {
    fn dim(&self) -> usize {
        self.payoff.len()
    }
    fn payoff(&mut self, _: &[Vector], _: &[Vector]) -> Vector {
        self.payoff.clone()
    }
    fn bound(&self) -> f64 {
        self.bound
    }
}

/// `zeta_t = +c` on odd rounds and `-c` on even rounds.
#[derive(Debug, Clone)]
pub struct AlternatingAdversary {
    pub payoff: Vector,
    pub bound: f64,
}

impl Adversary for AlternatingAdversary {
    fn dim(&self) -> usize {
        self.payoff.len()
    }
    fn payoff(&mut self, plays: &[Vector], _: &[Vector]) -> Vector {
        if plays.len() % 2 == 1 {
            self.payoff.clone()
        } else {
            -&self.payoff
        }
    }
    fn bound(&self) -> f64 {
        self.bound
    }
}

/// Payoffs uniform on `[-M, M]^n` from a seeded stream; `M` bounds the
/// L-infinity norm, which is the dual norm on the simplex.
#[derive(Debug, Clone)]
pub struct SeededRandomAdversary {
    n: usize,
    m: f64,
    rng: ChaCha8Rng,
}

impl SeededRandomAdversary {
    pub fn new(n: usize, m: f64, seed: u64) -> Self {
        SeededRandomAdversary {
            n,
            m,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Adversary for SeededRandomAdversary {
    fn dim(&self) -> usize {
        self.n
    }
    fn payoff(&mut self, _: &[Vector], _: &[Vector]) -> Vector {
        let m = self.m;
        Vector::from_vec((0..self.n).map(|_| self.rng.random_range(-m..=m)).collect())
    }
    fn bound(&self) -> f64 {
        self.m
    }
}

/// A played game: the UMD trace (with `xi_t = eta zeta_t`), the payoffs and
/// the regret.
#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    pub trace: Trace,
    pub payoffs: Vec<Vector>,
    pub regret: f64,
}

/// Plays `T` rounds.
///
/// Only DA and MD policies apply; the GoLD comparison needs an objective.
#[allow(clippy::too_many_arguments)]
pub fn run_regret_game(
    h: &Regularizer,
    set: &ConstraintSet,
    adversary: &mut dyn Adversary,
    eta: f64,
    horizon: usize,
    theta_1: &Vector,
    policy: DualPolicy,
    options: RunOptions,
) -> Result<GameOutcome> {
    if !set.is_compact() {
        return Err(UmdError::Argument(format!(
            "regret games need a compact set, got {}",
            set.name()
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(UmdError::Argument(format!("eta must be positive, got {eta}")));
    }
    if horizon == 0 {
        return Err(UmdError::Argument("horizon T must be >= 1".into()));
    }
    check_dim(h.dim(), set.dim())?;
    check_dim(h.dim(), adversary.dim())?;
    check_dim(h.dim(), theta_1.len())?;
    let (choice, step_branch) = match policy {
        DualPolicy::DualAveraging => (DualChoice::DualAveraging, Branch::DaStep),
        DualPolicy::MirrorDescent => (DualChoice::MirrorDescent, Branch::MdChosen),
        _ => {
            return Err(UmdError::Argument(
                "GoLD policies compare objective values and do not apply to regret games".into(),
            ))
        }
    };
    let norm = h.norm();
    let m = adversary.bound();
    let mut state = UmdState {
        t: 1,
        x: h.grad_conjugate(theta_1),
        theta: theta_1.clone(),
    };
    let mut plays: Vec<Vector> = Vec::with_capacity(horizon);
    let mut payoffs: Vec<Vector> = Vec::with_capacity(horizon);
    let mut records = Vec::with_capacity(horizon);
    let mut branch = Branch::None;
    for t in 1..=horizon {
        plays.push(state.x.clone());
        let zeta = adversary.payoff(&plays, &payoffs);
        check_dim(h.dim(), zeta.len())?;
        let size = norm.dual_norm(&zeta);
        if size > m * (1.0 + 1e-12) {
            return Err(UmdError::BoundViolation { t, norm: size, bound: m });
        }
        let xi = zeta.scale(eta);
        let next = umd_step(h, &state, &xi, choice)?;
        let certificate = if options.certify {
            let c = certify_umd_step(h, set, &state, &xi, &next, options.tol)?;
            if !c.ok {
                return Err(UmdError::Certification {
                    t,
                    residual_i: c.residual_i,
                    residual_ii: c.residual_ii,
                });
            }
            Some(c)
        } else {
            None
        };
        records.push(TraceRecord {
            t,
            x: state.x,
            theta: state.theta,
            xi,
            f_value: zeta.dot(&plays[t - 1]),
            branch,
            certificate,
            y: None,
            z: None,
        });
        payoffs.push(zeta);
        state = next;
        branch = step_branch;
    }
    let trace = Trace {
        records,
        final_state: state,
        final_branch: branch,
        final_f: f64::NAN,
        final_aux: None,
    };
    let regret = compute_regret(&plays, &payoffs, set)?;
    Ok(GameOutcome {
        trace,
        payoffs,
        regret,
    })
}

/// `max_x sum <zeta_t, x> - sum <zeta_t, x_t>`, with the comparator from the
/// support oracle.
pub fn compute_regret(plays: &[Vector], payoffs: &[Vector], set: &ConstraintSet) -> Result<f64> {
    if plays.len() != payoffs.len() {
        return Err(UmdError::Dimension {
            expected: plays.len(),
            got: payoffs.len(),
        });
    }
    let n = set.dim();
    let mut total = Vector::zeros(n);
    let mut earned = 0.0;
    for (x, z) in plays.iter().zip(payoffs) {
        check_dim(n, z.len())?;
        total = &total + z;
        earned += z.dot(x);
    }
    let best = -set.support_min(&-&total)?.value;
    Ok(best - earned)
}

/// `Omega / eta + eta M^2 T / (2K)`.
pub fn regret_bound(omega: f64, eta: f64, m: f64, k: f64, horizon: usize) -> f64 {
    omega / eta + eta * m * m * horizon as f64 / (2.0 * k)
}

/// The `eta` minimizing [`regret_bound`]: `sqrt(2 K Omega / (M^2 T))`.
pub fn tuned_eta(omega: f64, m: f64, k: f64, horizon: usize) -> f64 {
    crate::math::sqrt(2.0 * k * omega / (m * m * horizon as f64))
}
