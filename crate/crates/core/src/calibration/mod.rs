//! Tree-structured Parzen estimator search over a bounded parameter space.

mod space;
mod tpe;

pub use space::{ParamScale, ParamSpace, ParamSpec};
pub use tpe::{
    calibrate, tpe_propose, Calibration, ConvergencePoint, Phase, TpeConfig, TrialRecord,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CalibrationError {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),
    #[error("invalid TPE config: {0}")]
    InvalidConfig(String),
}
