//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A raw or derived parameter violates its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An expression hit a vanishing denominator or a pole.
    #[error("singular configuration: {what}{}", omega.map(|w| format!(" (at omega = {w:e} rad/s)")).unwrap_or_default())]
    Singular { what: String, omega: Option<f64> },

    /// The mechanical transduction channel is dead (|B(omega)| = 0), so the
    /// added noise referred to it is undefined.
    #[error("added noise undefined: mechanical transduction |B({omega:e})| = 0")]
    TransductionDead { omega: f64 },

    /// The steady-state amplitude solver did not settle.
    #[error("steady-state amplitude solve did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A requested design has no physical realization.
    #[error("infeasible design: {0}")]
    Infeasible(String),

    /// A tabulated signal was evaluated outside its support.
    #[error("frequency {omega:e} rad/s outside tabulated range [{min:e}, {max:e}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },

    /// A numerical kernel (eigenvalue solve, inversion) failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn singular(what: impl Into<String>, omega: Option<f64>) -> Self {
        Error::Singular {
            what: what.into(),
            omega,
        }
    }
}
