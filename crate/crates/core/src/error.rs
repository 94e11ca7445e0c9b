use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerical core can report.
///
/// [`Error::is_validation`] separates bad input from numerical breakdown.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("degenerate Möbius map (ad = bc)")]
    DegenerateMobius,
    #[error("half-plane chart needs Re a > 0, got {re}")]
    ChartDegenerate { re: f64 },
    #[error("point {z} is not in the open unit disk")]
    OutOfDisk { z: Complex64 },
    #[error("point {z} lies outside the sampled region")]
    OutsideSamples { z: Complex64 },
    #[error("point {z} is not in the open right half-plane")]
    OutOfHalfPlane { z: Complex64 },
    #[error("time {t} is outside the domain of the data")]
    Extrapolation { t: f64 },
    #[error("time {t} is a singular time of the data")]
    TimeSingularity { t: f64 },
    #[error("p = -1 encountered at z = {z}, t = {t}")]
    SingularValue { z: Complex64, t: f64 },
    #[error("Re p = {re} < 0 at z = {z}, t = {t}")]
    NotHerglotz { z: Complex64, t: f64, re: f64 },
    #[error("radial profile is invalid: {0}")]
    InvalidProfile(&'static str),
    #[error("integration failed: step size underflow after t = {last_good_time}")]
    IntegrationFailure { last_good_time: f64 },
    #[error("integration exceeded the step budget after t = {last_good_time}")]
    StepBudget { last_good_time: f64 },
    #[error("trajectory left the disk at t = {t} (|w| = {modulus})")]
    BarrierViolation { t: f64, modulus: f64 },
    #[error("chain did not converge by t = {horizon}: last {last}, previous {previous}")]
    Convergence { last: Complex64, previous: Complex64, horizon: f64 },
    #[error("Herglotz function violates the Becker condition (margin {margin})")]
    BeckerConditionViolated { margin: f64 },
    #[error("boundary extrapolation residual {residual} above tolerance at theta = {theta}")]
    BoundaryResolution { theta: f64, residual: f64 },
    #[error("|mu| = {modulus} >= 1 on the circle of radius {rho}")]
    NotQuasiconformal { rho: f64, modulus: f64 },
    #[error("degenerate Jacobian at {z}")]
    DegenerateJacobian { z: Complex64 },
    #[error("vanishing derivative at {z}")]
    DerivativeDegenerate { z: Complex64 },
    #[error("Beltrami field is not of Becker type")]
    NotBecker,
    #[error("reconstruction unstable: {0}")]
    ReconstructionUnstable(&'static str),
    #[error("time-zero map is not Möbius (defect {defect})")]
    CannotInvert { defect: f64 },
}

impl Error {
    /// True when the error comes from invalid input rather than from a
    /// numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidGrid(_)
                | Error::DegenerateMobius
                | Error::ChartDegenerate { .. }
                | Error::OutOfDisk { .. }
                | Error::OutOfHalfPlane { .. }
                | Error::OutsideSamples { .. }
                | Error::Extrapolation { .. }
                | Error::TimeSingularity { .. }
                | Error::InvalidProfile(_)
                | Error::NotHerglotz { .. }
                | Error::BeckerConditionViolated { .. }
                | Error::NotQuasiconformal { .. }
                | Error::NotBecker
        )
    }
}
