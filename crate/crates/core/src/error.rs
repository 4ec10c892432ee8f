use alloc::string::String;

/// Errors surfaced by the UMD toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UmdError {
    /// A point lies outside the domain where an oracle is defined
    /// (e.g. `ln 0` for the entropy mirror map, or `h(x) = +inf`).
    #[error("domain error: {0}")]
    Domain(String),
    /// The requested operation is not defined for this regularizer or set.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Linear minimization over an unbounded set with a nonzero direction.
    #[error("linear minimization is unbounded over {0}")]
    Unbounded(String),
    /// A step failed the UMD admissibility check.
    #[error("certification failed at t={t}: residual_I={residual_i:e}, residual_II={residual_ii:e}")]
    Certification {
        t: usize,
        residual_i: f64,
        residual_ii: f64,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("label error: {0}")]
    Label(String),
    /// An adversary exceeded its declared payoff bound.
    #[error("bound violation at round {t}: dual norm {norm:e} exceeds bound {bound:e}")]
    BoundViolation { t: usize, norm: f64, bound: f64 },
}

pub type Result<T> = core::result::Result<T, UmdError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(UmdError::Dimension { expected, got })
    }
}
