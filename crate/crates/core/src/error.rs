use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("degenerate material: singular transverse block ({0})")]
    DegenerateMaterial(&'static str),
    #[error("degenerate circuit: c33 + 2|Y1|G = {0} is not positive")]
    DegenerateCircuit(f64),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("boundary-condition error: {0}")]
    BoundaryCondition(String),
    #[error("solver error: {reason} (relative residual {residual:e})")]
    Solver { reason: String, residual: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
