//! Error type shared by every module in the crate.

use crate::grid::Dims;
use thiserror::Error;

/// Errors produced by grid construction, network assembly, training and
/// persistence.
#[derive(Debug, Error)]
pub enum Error {
    /// Two grids (or a grid and a network) disagree on their dimensions.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: Dims, actual: Dims },

    /// A grid with zero columns or zero rows.
    #[error("empty grid: cols and rows must both be at least 1")]
    EmptyGrid,

    /// A cell buffer whose length does not match the declared dimensions.
    #[error("cell buffer of length {len} does not match {dims}")]
    CellCount { dims: Dims, len: usize },

    /// A sample with no active cells; its distance field is undefined.
    #[error("degenerate sample: no active cells")]
    DegenerateSample,

    /// Invalid configuration value (threshold, hidden size, class range, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Training was asked to run without examples for one side of the pair.
    #[error("insufficient training data: {0}")]
    InsufficientData(String),

    /// Training was asked to run on a block kind with fixed weights.
    #[error("block ({0}, {1}) is not trainable")]
    NotTrainable(usize, usize),

    /// Block/unit wiring does not form a valid network.
    #[error("wiring error: {0}")]
    Wiring(String),

    /// A class addition was handed the wrong set of new blocks.
    #[error("growth error: {0}")]
    Growth(String),

    /// Malformed glyph text input.
    #[error("glyph parse error at line {line}: {msg}")]
    GlyphParse { line: usize, msg: String },

    /// Malformed IDX binary input.
    #[error("idx parse error at offset {offset}: {msg}")]
    IdxParse { offset: usize, msg: String },

    /// A loader produced a dataset with no items.
    #[error("empty dataset")]
    EmptyDataset,

    /// A model file that parses but violates a structural invariant.
    #[error("model load error: {0}")]
    ModelLoad(String),

    /// A model that cannot be faithfully written (e.g. non-finite weights).
    #[error("model save error: {0}")]
    ModelSave(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
