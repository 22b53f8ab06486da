use thiserror::Error;

pub type Result<T, E = VemError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum VemError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index out of range: {what} {index} (count {count})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        count: usize,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("face {face} is not planar: deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NonPlanarFace {
        face: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("non-manifold face {face}: {incident} incident cells")]
    NonManifoldFace { face: usize, incident: usize },

    #[error("inverted cell {cell}: signed volume {volume:.3e}")]
    InvertedCell { cell: usize, volume: f64 },

    #[error("cell {0} not star-shaped about barycenter")]
    NotStarShaped(usize),

    #[error("degenerate triangle in the fan of face {0}")]
    DegenerateFace(usize),

    #[error("unsupported polynomial degree k = {0} (supported: 2, 3, 4)")]
    UnsupportedDegree(usize),

    #[error("singular local system: {0}")]
    SingularLocal(String),

    #[error("DoF set does not separate [P_k]^3 on cell {0}")]
    DofsNotUnisolvent(usize),

    #[error("inconsistent boundary specification: {0}")]
    Boundary(String),

    #[error("singular global system: {0}")]
    SingularSystem(String),

    #[error("request refused: {0}")]
    Refused(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
