use thiserror::Error;

/// Errors produced by the integral evaluators and the continuation engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The level set `H = h` has no real oval (`h < -1/4`).
    #[error("no real oval exists for h = {h} (requires h >= -1/4)")]
    NoRealOval { h: f64 },

    /// The requested cycle does not exist at this energy.
    #[error("cycle {cycle} is unavailable at h = {h}")]
    CycleUnavailable { cycle: &'static str, h: f64 },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge (estimated error {error:.3e}, target {target:.3e})")]
    QuadratureFailure { error: f64, target: f64 },

    /// The Picard-Fuchs system is singular at this energy (`h = 0` or `h = -1/4`).
    #[error("Picard-Fuchs system is singular at h = {h}")]
    SingularEnergy { h: String },

    /// A continuation path violates its clearance from the branch cut.
    #[error("continuation path comes within {dist:.3e} of the cut (clearance {clearance:.3e})")]
    PathTooClose { dist: f64, clearance: f64 },

    /// The ODE step size underflowed or the step budget was exhausted.
    #[error("ODE integration stalled at h = {h} (step {step:.3e} after {steps} steps)")]
    StiffnessFailure { h: String, step: f64, steps: usize },

    /// Richardson extrapolation of boundary values did not converge.
    #[error("boundary-value extrapolation did not converge (estimate {estimate:.3e}, target {target:.3e})")]
    ExtrapolationFailure { estimate: f64, target: f64 },

    /// Least-squares fit of the asymptotic constants is unusable.
    #[error("asymptotic fit failed (condition estimate {condition:.3e})")]
    FitFailure { condition: f64 },

    /// Contour refinement hit its budget before the winding stabilised.
    #[error("contour refinement exhausted ({points} points, depth {depth})")]
    RefinementExhausted { points: usize, depth: usize },

    /// Invalid Melnikov parameters or configuration values.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for domain errors (caller asked for something outside the model),
    /// false for numerical failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::NoRealOval { .. }
                | Error::CycleUnavailable { .. }
                | Error::SingularEnergy { .. }
                | Error::InvalidInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
