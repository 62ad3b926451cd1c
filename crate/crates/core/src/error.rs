use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular coordinate point (xi = 0, theta = 0) maps to infinity")]
    SingularPoint,

    #[error("point coincides with a limit point (0, 0, {0:+e})")]
    LimitPoint(f64),

    #[error("point lies inside resonator D{sphere} (xi = {xi:e})")]
    InteriorPoint { sphere: u8, xi: f64 },

    #[error("series needs about {needed:.3e} terms to reach tolerance {tol:e}, cap is {cap}")]
    TruncationCap { needed: f64, cap: usize, tol: f64 },

    #[error("frequency {omega:e} is within the guard band of the resonance {resonance:e}")]
    PoleProximity { omega: f64, resonance: f64 },

    #[error("finite-difference step {step:e} too large for clearance {clearance:e}")]
    StepGuard { step: f64, clearance: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("internal consistency failure: {0}")]
    Degenerate(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationCap { .. }
                | Error::PoleProximity { .. }
                | Error::Quadrature(_)
                | Error::Degenerate(_)
        )
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}
