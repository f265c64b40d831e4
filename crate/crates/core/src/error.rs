use thiserror::Error;

/// Errors raised by the estimators and their supporting machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observation {index} has negative time {time}")]
    NegativeTime { index: usize, time: f64 },
    #[error("observation {index} has non-finite time")]
    NonFiniteTime { index: usize },
    #[error("observation {index} has indicator {value}, expected 0 or 1")]
    BadIndicator { index: usize, value: i64 },
    #[error("sample is empty")]
    EmptySample,
    #[error("values and weights differ in length ({values} vs {weights})")]
    LengthMismatch { values: usize, weights: usize },
    #[error("weight {index} is not positive ({weight})")]
    NonpositiveWeight { index: usize, weight: f64 },
    #[error("bandwidth must be positive and finite, got {0}")]
    NonpositiveBandwidth(f64),
    #[error("grid spacing {spacing} is coarser than h/16 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("t = {t} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("smoothed density {value:e} at t = {t} is below the floor {floor:e}")]
    DensityFloorViolation { t: f64, value: f64, floor: f64 },
    #[error("distribution estimate {value} at t = {t} exceeds the hazard ceiling 1 - {ceiling:e}")]
    HazardDenominatorViolation { t: f64, value: f64, ceiling: f64 },
    #[error("smoothed density vanishes everywhere")]
    DegenerateSupport,
    #[error("bias factor {0:e} vanishes; the aMSE-optimal rate is not n^-1/5 or n^-1/7 here")]
    DegenerateBias(f64),
    #[error("variance factor {0:e} vanishes at this point")]
    DegenerateVariance(f64),
    #[error("censoring density is not positive at t = {0}")]
    ZeroCensoringDensity(f64),
    #[error("pilot estimate cannot be inverted: {0}")]
    PilotDegenerate(String),
    #[error("candidate grid is empty")]
    EmptyGrid,
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors caused by evaluating an estimator outside the region
    /// where it is defined, as opposed to malformed input.
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::OutOfDomain { .. }
                | Error::DensityFloorViolation { .. }
                | Error::HazardDenominatorViolation { .. }
                | Error::DegenerateSupport
                | Error::DegenerateBias(_)
                | Error::DegenerateVariance(_)
                | Error::ZeroCensoringDensity(_)
                | Error::PilotDegenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
