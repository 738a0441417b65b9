use crate::lattice::Vertex;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument is undefined at the origin")]
    OriginArgument,

    #[error("vertex {0} lies outside the kernel window")]
    OutOfWindow(Vertex),

    #[error("kernel relaxation did not converge: residual {residual:.3e} after {sweeps} sweeps")]
    KernelNotConverged { residual: f64, sweeps: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("step cap of {cap} exceeded")]
    StepCap { cap: u64 },

    #[error("move cap of {cap} exceeded before absorption (stack may not be regular)")]
    MoveCap { cap: u64 },

    #[error("word is not admissible at position {index}")]
    NotAdmissible { index: usize },

    #[error("word construction failed: {0}")]
    Construction(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
