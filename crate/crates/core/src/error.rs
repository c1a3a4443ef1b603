use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("directed part of the graph contains a cycle")]
    Cyclic,

    #[error("vertex sets differ between the compared graphs")]
    VertexMismatch,

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),

    #[error("graph parse error at line {line}: {msg}")]
    GraphSyntax { line: usize, msg: String },

    #[error("BIF syntax error at {line}:{col}: {msg}")]
    BifSyntax {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("factor scopes or cardinalities do not match")]
    ScopeMismatch,

    #[error("joint domain of {cells} cells exceeds the cap of {cap}")]
    DomainTooLarge { cells: u128, cap: usize },

    #[error("malformed intervention: {0}")]
    BadIntervention(String),

    #[error("causal effect is not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("equivalence class has {members} members, above the exact-mode cap of {cap}; use practical mode")]
    TooManyHypotheses { members: usize, cap: usize },

    #[error("no hypotheses to choose from")]
    EmptyHypotheses,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
