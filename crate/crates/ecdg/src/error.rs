use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum EcdgError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unpaired spectrum: {unpaired} eigenvalue(s) of one sign have no partner; augment the system first")]
    UnpairedSpectrum { unpaired: usize },

    #[error("eigen-solver did not converge after {sweeps} sweeps (off-diagonal norm {offdiag:e})")]
    NoConvergence { sweeps: usize, offdiag: f64 },

    #[error("singular matrix encountered in {0}")]
    Singular(&'static str),

    #[error("mesh error: {0}")]
    Mesh(#[from] MeshError),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Mesh-specific failures; each malformed input has its own variant.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("could not parse mesh file at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("cell {cell} has zero or negative area ({area:e})")]
    Degenerate { cell: usize, area: f64 },

    #[error("non-conforming connectivity: edge ({a}, {b}) is shared by {count} cells")]
    NonConforming { a: usize, b: usize, count: usize },

    #[error("vertex {vertex} hangs on edge ({a}, {b}) without splitting it")]
    HangingNode { vertex: usize, a: usize, b: usize },

    #[error("vertex index {index} out of range (mesh has {count} vertices)")]
    VertexOutOfRange { index: usize, count: usize },

    #[error("periodic matching failed for boundary edge at ({x:.6}, {y:.6})")]
    PeriodicMismatch { x: f64, y: f64 },

    #[error("invalid mesh parameters: {0}")]
    Parameters(String),
}

pub type Result<T> = std::result::Result<T, EcdgError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(EcdgError::Invalid(msg.into()))
}
