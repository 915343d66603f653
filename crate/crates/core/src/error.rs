use crate::prelude::*;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure kinds shared by every module.
///
/// Validation errors describe bad inputs; the numerical variants describe
/// models that cannot be evaluated at the requested point.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("material not found: {name} (registered: {})", registered.join(", "))]
    MaterialNotFound { name: String, registered: Vec<String> },
    #[error("invalid material {name}: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("insufficient acoustic data for {0}: need sound velocity or both stiffness and density")]
    InsufficientAcousticData(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("microwave field amplitude required for the electro-mechanical coupling")]
    FieldAmplitudeRequired,
    #[error("degenerate lossless resonator: {0}")]
    DegenerateLossless(String),
    #[error("lossless singularity at {omega} rad/s")]
    LosslessSingularity { omega: f64 },
    #[error("invalid acoustic mode count {0}: must be odd and at least 1")]
    InvalidModeCount(usize),
    #[error("no optomechanical readout: optical-acoustic coupling is zero")]
    NoOptomechanicalReadout,
    #[error("drive inconsistent: {0}")]
    DriveInconsistent(String),
    #[error("parity forbidden: the piezo distribution gives zero overlap with mode index {0}")]
    ParityForbidden(u64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unknown ledger entry: {0}")]
    UnknownEntry(String),
    #[error("ledger entry selected twice: {0}")]
    DuplicateSelection(String),
    #[error("flat data: the observable has zero variance")]
    FlatData,
    #[error("non-finite model value at parameters [{}]", format_snapshot(.0))]
    NonFiniteModel(Vec<(String, f64)>),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

fn format_snapshot(params: &[(String, f64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v:e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures of the model evaluation rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::LosslessSingularity { .. }
                | Error::NonFiniteModel(_)
                | Error::DegenerateLossless(_)
        )
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

pub(crate) fn require_non_negative(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

pub(crate) fn require_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be finite, got {v}")))
    }
}
