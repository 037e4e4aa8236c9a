use crate::geometry::{CriticalExponent, Regime};
use crate::solver::MinimizerRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("field length {got} does not match grid cell count {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {:.3e})", residuals.last().copied().unwrap_or(f64::NAN))]
    LinearSolve { iterations: usize, residuals: Vec<f64> },

    #[error("outer iteration did not converge in {} steps (residual {:.3e})", .0.record.outer_iters, .0.record.pde_residual)]
    NonConvergence(Box<NonConvergence>),

    #[error("{0}")]
    Refused(RegimeRefusal),

    #[error("no sign change of u(b) found for slopes in [{lo:e}, {hi:e}] (branch {branch})")]
    Bracketing { lo: f64, hi: f64, branch: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

/// Last iterate and histories of a minimization that hit its iteration cap.
#[derive(Clone)]
pub struct NonConvergence {
    pub record: MinimizerRecord,
}

impl std::fmt::Debug for NonConvergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let r = &self.record;
        f.debug_struct("NonConvergence")
            .field("outer_iters", &r.outer_iters)
            .field("c", &r.c)
            .field("pde_residual", &r.pde_residual)
            .field("fallback_steps", &r.fallback_steps)
            .field("cells", &r.v.len())
            .finish()
    }
}

/// Structured report emitted instead of iterating when no nontrivial solution exists.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RegimeRefusal {
    pub n: u32,
    pub m: u32,
    pub p: f64,
    pub critical_exponent: CriticalExponent,
    pub regime: Regime,
    pub kappa: f64,
}

impl std::fmt::Display for RegimeRefusal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "nonexistence regime: p = {} is {} for N = {}, m = {} (critical exponent {}, Pohozaev factor {:.6}); \
             the Pohozaev obstruction rules out nontrivial solutions for p >= 2*_(N,m)",
            self.p, self.regime, self.n, self.m, self.critical_exponent, self.kappa
        )
    }
}
