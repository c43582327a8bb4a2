use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative radius {0} rejected")]
    NegativeRadius(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radial blow-up: r = {r} exceeded ceiling {ceiling}")]
    BlowUp { r: f64, ceiling: f64 },

    #[error("finite-time blow-up: 1 - 2k a r0^(2k) t = {denom} is not positive")]
    FlowDomain { denom: f64 },

    #[error("input too short: have {have}, need at least {need}")]
    TooShort { have: usize, need: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("not a fixed point: residual {residual}")]
    NotAFixedPoint { residual: f64 },

    #[error("fixed point is not nonhyperbolic: {0}")]
    NotNonhyperbolic(String),

    #[error("resonant rotation angle: {0}")]
    ResonantAngle(String),

    #[error("orbit left the configured basin at x = {0}")]
    BasinEscape(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
