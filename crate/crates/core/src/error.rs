use thiserror::Error;

use crate::model::SensorId;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimensions must be strictly positive (L={length}, W={width}, H={height})")]
    InvalidDimensions {
        length: f64,
        width: f64,
        height: f64,
    },
    #[error("state vector has non-finite components")]
    NonFiniteState,
    #[error("covariance not symmetric (max asymmetry {0:e})")]
    CovarianceNotSymmetric(f64),
    #[error("covariance not positive semi-definite (min eigenvalue {0:e})")]
    CovarianceNotPsd(f64),
    #[error("invalid belief mass ({exists}, {not_exists}, {unknown})")]
    InvalidMass {
        exists: f64,
        not_exists: f64,
        unknown: f64,
    },
    #[error("object of sensor {found} listed under sensor {expected}")]
    SensorMismatch { expected: SensorId, found: SensorId },
    #[error("object timestamp {object} differs from list timestamp {list}")]
    TimestampMismatch { list: f64, object: f64 },
    #[error("duplicate track {track} for sensor {sensor}")]
    DuplicateTrack { sensor: SensorId, track: u64 },
    #[error("sensor {id}: {what}")]
    InvalidSensor { id: SensorId, what: &'static str },
    #[error("invalid map: {0}")]
    InvalidMap(&'static str),
    #[error("no road cells")]
    NoRoadCells,
}

#[derive(Debug, Error, PartialEq)]
pub enum PlausibilityError {
    #[error("plausibility factor {name} = {value} outside [0, 1]")]
    FactorOutOfRange { name: &'static str, value: f64 },
    #[error("sigmoid calibration needs confirmation threshold > initial score ({threshold} <= {initial})")]
    Calibration { initial: f64, threshold: f64 },
    #[error("total conflict between belief masses")]
    TotalConflict,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("insufficient data: {needed} samples needed, {got} available")]
    InsufficientData { needed: usize, got: usize },
    #[error("insufficient intervals: {needed} needed, {got} available")]
    InsufficientIntervals { needed: usize, got: usize },
    #[error("no sensors with valid confidence intervals")]
    NoSensors,
}

/// Configuration problem anchored to a source line when one is known.
#[derive(Debug, Error, PartialEq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }

    pub fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordingError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a recording (bad magic)")]
    BadMagic,
    #[error("unsupported recording schema version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt frame: {0}")]
    Corrupt(String),
    #[error("recording has no header frame")]
    MissingHeader,
}

impl From<bincode::Error> for RecordingError {
    fn from(e: bincode::Error) -> Self {
        RecordingError::Corrupt(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Plausibility(#[from] PlausibilityError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Recording(#[from] RecordingError),
}
