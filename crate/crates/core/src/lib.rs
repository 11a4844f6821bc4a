//! Pairwise image recognition on binary grids.
//!
//! The network has three layers. The first is a set of two-input
//! discriminator blocks, one per ordered or unordered pair of units; each
//! block answers "does this input look more like side A or side B". The
//! second layer is one unit per training sample (or per class, when blocks
//! are trained), firing only when its side wins every pairwise contest.
//! The third layer ORs units into classes.
//!
//! Blocks come in three kinds:
//!
//! * metric: closed-form integer weights built from distance fields, no
//!   training; the full network reproduces nearest-neighbor classification
//!   exactly (see [`oracle::metric_oracle`]),
//! * perceptron: a single trainable linear threshold unit,
//! * sigmoid net: one hidden sigmoid layer trained by gradient descent.
//!
//! The pairwise structure never couples blocks, so a new class is added by
//! training only the blocks that face it ([`Ensemble::add_class`]); every
//! existing parameter stays untouched.
//!
//! All randomness flows through explicitly seeded [`rand_chacha::ChaCha8Rng`]
//! streams, and model files round-trip bit-exactly, so every result here is
//! reproducible from a seed.

pub mod block;
pub mod ensemble;
pub mod error;
pub mod glyphs;
pub mod grid;
pub mod io;
pub mod metric;
pub mod oracle;

pub use block::{
    block_bit, block_raw_output, init_block, train_block, Algorithm, BlockParams, KindSpec,
    PairBlock, TrainConfig, TrainReport,
};
pub use ensemble::{
    assemble, expected_block_count, growth_delta, metric_ensemble, required_pairs, win_counts,
    BitMatrix, Decision, Ensemble, Outcome, PairKey, Topology, TopologyVariant,
};
pub use error::{Error, Result};
pub use glyphs::{glyph_dataset, letter_glyph, noisy_copy, GLYPH_COLS, GLYPH_ROWS, LETTER_COUNT};
pub use grid::{
    binarize_grid, validate_dataset, ClassId, Dataset, Dims, GrayDataset, GrayGrid, ImageGrid,
    LabeledImage, ValidationIssue, ValidationReport,
};
pub use io::model::{
    block_param_bytes, load_model, model_from_json, model_to_json, save_model, SavedModel,
};
pub use metric::{
    build_pair_weights, distance_field, pair_weights_from_samples, sample_score, threshold_fire,
    weighted_sum, DistanceField, WeightGrid,
};
pub use oracle::{metric_oracle, tournament_oracle, OracleVerdict};
