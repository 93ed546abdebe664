use thiserror::Error;

/// Errors produced by the analysis passes, the format, the tilers and the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid pattern spec: {0}")]
    InvalidSpec(String),

    /// A row (or column, for transposed checks) is not affine-compressible.
    #[error("mask is not regular: row {row} breaks the affine progression at column {col}")]
    Regularity { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {len} stored values")]
    Index { index: usize, len: usize },

    /// Some point of the point-set is not covered by any thread-block.
    #[error("arrangement leaves point ({x}, {y}) uncovered")]
    Coverage { x: usize, y: usize },

    #[error("search budget of {budget} nodes exceeded")]
    Budget { budget: usize },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
