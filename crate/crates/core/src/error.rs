use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no drive field: operation time undefined")]
    NoDrive,

    #[error("noiseless: decoherence time infinite")]
    Noiseless,

    #[error("unphysical polarization: |P| = {norm}")]
    UnphysicalPolarization { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("unreachable error target: delta = {0} must be below 1/2")]
    UnreachableTarget(f64),

    #[error("error target must be positive, got delta = {0}")]
    NonPositiveTarget(f64),

    #[error("zero-bias hyperfine energy A0 is not set")]
    MissingHyperfine,

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("plan too large: {work} trajectory-steps exceeds the cap of {cap}")]
    PlanTooLarge { work: u128, cap: u128 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
