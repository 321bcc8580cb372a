use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("loop at vertex {0}")]
    Loop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("vertex index {index} out of range for graph on {vertex_count} vertices")]
    VertexOutOfRange { index: usize, vertex_count: usize },

    #[error("graph has {vertex_count} vertices, above the size guard of {max}")]
    SizeGuard { vertex_count: usize, max: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("unknown orbit class {0}")]
    UnknownClass(usize),

    #[error("measure is not quasi-invariant: class {missing} of an atom's graph carries no weight")]
    NotQuasiInvariant { missing: String },

    #[error("radius mismatch: {0} vs {1}")]
    RadiusMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty measure")]
    EmptyMeasure,
}

pub type Result<T> = std::result::Result<T, Error>;
