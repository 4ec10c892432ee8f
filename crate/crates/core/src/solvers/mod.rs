//! The UMD engine and its variants.
//!
//! The engine stores `theta` and recomputes `x = grad h*(theta)`, so
//! condition (I) holds by construction and every policy is just a rule for
//! picking the next dual point among admissible ones.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Result, UmdError};
use crate::linalg::Vector;
use crate::math;

mod accelerated;
mod engine;
mod quasi_monotone;
mod step;

pub use accelerated::{aumd_coefficients, run_aumd};
pub use engine::{averaged_iterate, run_umd};
pub use quasi_monotone::run_quasi_monotone;
pub use step::{certify_umd_step, gold_branch_choice, umd_step};

/// Default certification tolerance (absolute).
pub const CERT_TOL: f64 = 1e-7;

/// Which admissible dual point a single step keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualChoice {
    /// `theta' = theta + xi`.
    DualAveraging,
    /// `theta' = grad F(x')`.
    MirrorDescent,
}

/// Rule for choosing the dual iterate along a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualPolicy {
    DualAveraging,
    MirrorDescent,
    /// Compare the MD and DA candidates one step ahead every `k` steps.
    Gold { k: usize },
    /// Compare after `tau` rollout steps every `k` steps, `1 <= tau < k`.
    GoldLookahead { k: usize, tau: usize },
}

impl DualPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DualPolicy::Gold { k: 0 } => {
                Err(UmdError::Argument("GoLD needs k >= 1".into()))
            }
            DualPolicy::GoldLookahead { k, tau } if tau == 0 || tau >= k => Err(UmdError::Argument(
                format!("lookahead GoLD needs 1 <= tau < k, got k = {k}, tau = {tau}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn needs_mirror_map(&self) -> bool {
        !matches!(self, DualPolicy::DualAveraging)
    }

    /// `(k, tau)` for the GoLD kinds; plain GoLD has `tau = 1`.
    pub fn gold_params(&self) -> Option<(usize, usize)> {
        match *self {
            DualPolicy::Gold { k } => Some((k, 1)),
            DualPolicy::GoldLookahead { k, tau } => Some((k, tau)),
            _ => None,
        }
    }

    /// Whether step `t` is a comparison step: `t >= 2` and `t = 2 mod k`.
    pub fn compares_at(&self, t: usize) -> bool {
        match self.gold_params() {
            Some((k, _)) => t >= 2 && t % k == 2 % k,
            None => false,
        }
    }

    /// Short label used in file names and reports: `md`, `da`, `gold5`,
    /// `gold20-7`.
    pub fn label(&self) -> String {
        match *self {
            DualPolicy::DualAveraging => String::from("da"),
            DualPolicy::MirrorDescent => String::from("md"),
            DualPolicy::Gold { k } => format!("gold{k}"),
            DualPolicy::GoldLookahead { k, tau } => format!("gold{k}-{tau}"),
        }
    }
}

/// Step sizes `gamma_t`, indexed from `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// Explicit list; indices past the end reuse the last entry.
    List(Vec<f64>),
    /// `gamma = (omega / m) * sqrt(k / horizon)` for every step.
    LipschitzOptimal {
        omega: f64,
        m: f64,
        k: f64,
        horizon: usize,
    },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |g: f64| g > 0.0 && g.is_finite();
        match self {
            StepSchedule::Constant(g) if !ok(*g) => Err(UmdError::Argument(format!(
                "step size must be positive and finite, got {g}"
            ))),
            StepSchedule::List(gs) if gs.is_empty() => {
                Err(UmdError::Argument("empty step-size list".into()))
            }
            StepSchedule::List(gs) => match gs.iter().position(|g| !ok(*g)) {
                Some(i) => Err(UmdError::Argument(format!(
                    "step size {} at position {} is not positive and finite",
                    gs[i],
                    i + 1
                ))),
                None => Ok(()),
            },
            StepSchedule::LipschitzOptimal { horizon: 0, .. } => {
                Err(UmdError::Argument("horizon must be >= 1".into()))
            }
            StepSchedule::LipschitzOptimal { .. } if !ok(self.gamma(1)) => Err(UmdError::Argument(
                "Lipschitz-optimal schedule needs positive omega, m and k".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn gamma(&self, t: usize) -> f64 {
        match self {
            StepSchedule::Constant(g) => *g,
            StepSchedule::List(gs) => {
                let i = t.saturating_sub(1).min(gs.len().saturating_sub(1));
                gs[i]
            }
            StepSchedule::LipschitzOptimal {
                omega,
                m,
                k,
                horizon,
            } => omega / m * math::sqrt(k / *horizon as f64),
        }
    }
}

/// One primal/dual pair with `x = grad h*(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UmdState {
    pub t: usize,
    pub x: Vector,
    pub theta: Vector,
}

/// How the dual iterate of a record was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Plain dual-averaging update (DA policy, or GoLD off comparison steps).
    DaStep,
    /// Mirror-descent reset, either forced by the MD policy or chosen by GoLD.
    MdChosen,
    /// GoLD comparison kept the DA candidate.
    DaChosen,
    /// No update produced this dual (the initial point).
    None,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::DaStep => "da-step",
            Branch::MdChosen => "md-chosen",
            Branch::DaChosen => "da-chosen",
            Branch::None => "none",
        }
    }
}

/// Outcome of checking one transition against conditions (I) and (II).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub ok: bool,
    pub residual_i: f64,
    pub residual_ii: f64,
}

/// Iteration `t` of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub x: Vector,
    pub theta: Vector,
    /// Dual increment applied at this step.
    pub xi: Vector,
    /// Objective at the point where the oracle was queried (`x_t`, or `y_t`
    /// for the quasi-monotone and accelerated variants).
    pub f_value: f64,
    pub branch: Branch,
    /// Certificate of the transition `t -> t + 1`, when certification ran.
    pub certificate: Option<Certificate>,
    /// Auxiliary sequence `y_t` of the quasi-monotone and accelerated runs.
    pub y: Option<Vector>,
    /// Auxiliary sequence `z_t` of the accelerated run.
    pub z: Option<Vector>,
}

/// A run of `T` steps: records for `t = 1..=T` and the state at `T + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub final_state: UmdState,
    pub final_branch: Branch,
    /// Objective at the final output point (`x_{T+1}`, `y_{T+1}` or `z_{T+1}`).
    pub final_f: f64,
    /// Final auxiliary point for the variants that have one.
    pub final_aux: Option<Vector>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `x_1, ..., x_{T+1}`.
    pub fn primal_points(&self) -> Vec<&Vector> {
        self.records
            .iter()
            .map(|r| &r.x)
            .chain(core::iter::once(&self.final_state.x))
            .collect()
    }

    /// `f` values for `t = 1..=T+1`.
    pub fn f_values(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.f_value)
            .chain(core::iter::once(self.final_f))
            .collect()
    }

    /// The largest residuals over all certified steps.
    pub fn worst_residuals(&self) -> (f64, f64) {
        self.records
            .iter()
            .filter_map(|r| r.certificate)
            .fold((0.0, f64::NEG_INFINITY), |(a, b), c| {
                (a.max(c.residual_i), b.max(c.residual_ii))
            })
    }
}

/// Options shared by all run loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub certify: bool,
    pub tol: f64,
}

impl RunOptions {
    /// Certification on at the default tolerance.
    pub fn checked() -> Self {
        RunOptions {
            certify: true,
            tol: CERT_TOL,
        }
    }

    /// Certification off.
    pub fn benchmark() -> Self {
        RunOptions {
            certify: false,
            tol: CERT_TOL,
        }
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        Self::checked()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_steps() {
        let g1 = DualPolicy::Gold { k: 1 };
        assert!((2..50).all(|t| g1.compares_at(t)));
        assert!(!g1.compares_at(1));
        let g5 = DualPolicy::Gold { k: 5 };
        let hits: Vec<usize> = (1..20).filter(|t| g5.compares_at(*t)).collect();
        assert_eq!(hits, vec![2, 7, 12, 17]);
        let g2 = DualPolicy::GoldLookahead { k: 2, tau: 1 };
        let hits: Vec<usize> = (1..9).filter(|t| g2.compares_at(*t)).collect();
        assert_eq!(hits, vec![2, 4, 6, 8]);
        assert!(!DualPolicy::MirrorDescent.compares_at(2));
    }

    #[test]
    fn policy_validation() {
        assert!(DualPolicy::Gold { k: 0 }.validate().is_err());
        assert!(DualPolicy::GoldLookahead { k: 5, tau: 5 }.validate().is_err());
        assert!(DualPolicy::GoldLookahead { k: 5, tau: 0 }.validate().is_err());
        assert!(DualPolicy::GoldLookahead { k: 20, tau: 7 }.validate().is_ok());
        assert_eq!(DualPolicy::GoldLookahead { k: 20, tau: 7 }.label(), "gold20-7");
    }

    #[test]
    fn schedules() {
        assert_eq!(StepSchedule::Constant(0.5).gamma(100), 0.5);
        let l = StepSchedule::List(vec![1.0, 2.0, 3.0]);
        assert_eq!((l.gamma(1), l.gamma(3), l.gamma(10)), (1.0, 3.0, 3.0));
        let o = StepSchedule::LipschitzOptimal {
            omega: 2.0,
            m: 4.0,
            k: 1.0,
            horizon: 100,
        };
        assert!((o.gamma(7) - 0.05).abs() < 1e-15);
        assert!(StepSchedule::Constant(0.0).validate().is_err());
        assert!(StepSchedule::Constant(f64::INFINITY).validate().is_err());
        assert!(StepSchedule::List(vec![1.0, -1.0]).validate().is_err());
        assert!(StepSchedule::List(vec![]).validate().is_err());
        assert!(o.validate().is_ok());
    }
}
