use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("invalid bit value {0} (expected 0 or 1)")]
    InvalidBit(u8),

    #[error("invalid hex string {input:?}: {reason}")]
    InvalidHex { input: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("LDPC construction failed for seed {seed}: {reason}")]
    LdpcConstruction { seed: u64, reason: String },

    #[error("infeasible template parameters M={count}, d={length}, min_distance={min_distance}: {reason}")]
    InfeasibleTemplates { count: usize, length: usize, min_distance: usize, reason: String },

    #[error("template count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("unknown channel preset {name:?}; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<&'static str> },

    #[error("invalid tamper specification: {0}")]
    InvalidTamper(String),

    #[error("frame {width}x{height} too small: need at least {min_width}x{min_height}")]
    FrameTooSmall { width: usize, height: usize, min_width: usize, min_height: usize },

    #[error("unsupported distortion: {0}")]
    UnsupportedDistortion(String),

    #[error("external encoder failed: {0}")]
    Encoder(String),

    #[error("unsupported manifest version {0:?}")]
    UnsupportedVersion(String),

    #[error("no frames found in {0}")]
    NoFrames(PathBuf),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
