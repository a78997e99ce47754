use alloc::string::String;

/// Errors raised by the modeling and design routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),
    #[error("series branch at resonance (reactance {reactance_ohm:e} ohm)")]
    ResonanceSingularity { reactance_ohm: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("frequency {f_hz} Hz outside model band [{lo_hz}, {hi_hz}] Hz")]
    OutOfBand { f_hz: f64, lo_hz: f64, hi_hz: f64 },
    #[error("susceptance {b_s} S outside [{min_s}, {max_s}] S")]
    OutOfRange { b_s: f64, min_s: f64, max_s: f64 },
    #[error("subcarrier at {f_hz} Hz falls outside the susceptance model band [{lo_hz}, {hi_hz}] Hz")]
    BandMismatch { f_hz: f64, lo_hz: f64, hi_hz: f64 },
    #[error("input matrix is not symmetric (max deviation {0:e})")]
    AsymmetricInput(f64),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("all subcarrier gains are zero")]
    AllZeroGains,
    #[error("non-finite objective or gradient")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
