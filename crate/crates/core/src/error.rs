use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} sites vs {right} sites")]
    Dimension { left: usize, right: usize },

    #[error("index error: {0}")]
    Index(String),

    #[error("capacity exceeded: {what} (limit {limit}){hint}")]
    Capacity {
        what: String,
        limit: usize,
        hint: &'static str,
    },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid network: {0}")]
    Network(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("collapse failed between classes {from} and {to}: residual {residual:.3e}")]
    Collapse {
        from: usize,
        to: usize,
        residual: f64,
    },

    #[error("synthesis failed: {0}")]
    Synthesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dense_capacity(sites: usize, limit: usize) -> Self {
        Error::Capacity {
            what: format!("dense backend asked for {sites} sites"),
            limit,
            hint: "; use the fermion backend for modified-XY networks",
        }
    }
}
