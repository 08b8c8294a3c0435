//! Error type shared by every solver stage.

use thiserror::Error;

/// Failures raised by the spectral solver and its front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid values or coefficients do not match the configured band limit.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Data lies (partly) in the kernel of an operator that was asked to invert it.
    #[error("kernel obstruction: residual {residual:.3e} exceeds {tolerance:.1e}")]
    Kernel { residual: f64, tolerance: f64 },

    /// Half-space data carries frequencies where the multipliers are not admissible.
    #[error("half-space data rejected: {0}")]
    HalfSpaceData(String),

    /// The interface displacement is too large for the coordinate map.
    #[error("inadmissible height function: {0}")]
    Inadmissible(String),

    /// Right-hand side violates the divergence/flux compatibility condition.
    #[error("incompatible data: volume flux {volume:.6e} vs surface flux {surface:.6e}")]
    Compatibility { volume: f64, surface: f64 },

    /// The drift iteration failed to contract.
    #[error("drift iteration diverged (observed ratio {ratio:.3})")]
    Richardson { ratio: f64 },

    /// The outer fixed-point iteration failed.
    #[error("fixed-point iteration failed: {0}")]
    FixedPoint(String),

    /// Parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Malformed configuration file.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
