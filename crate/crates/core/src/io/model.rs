//! Model files: a single JSON document with a stable field order.
//!
//! Metric weights are stored as exact integers. Real parameters are stored
//! as canonical hexadecimal float strings (see [`super::hexfloat`]) so the
//! trained bits survive any platform; a decimal shadow rides along for
//! human readers and is ignored on load. Loading re-validates every
//! structural invariant, so a corrupt file can never produce an invalid
//! network.

use crate::block::{BlockParams, PairBlock};
use crate::ensemble::{assemble, expected_block_count, Ensemble, PairKey, TopologyVariant};
use crate::error::{Error, Result};
use crate::grid::{ClassId, Dims};
use crate::io::hexfloat::{from_hex, to_hex};
use crate::metric::WeightGrid;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

/// The supported file format version.
pub const FORMAT_VERSION: u32 = 1;

/// A network plus the preprocessing it expects: inputs should be binarized
/// at `binarize_threshold` before prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub ensemble: Ensemble,
    pub binarize_threshold: f64,
}

#[derive(Serialize, Deserialize)]
struct DimsFile {
    cols: usize,
    rows: usize,
}

#[derive(Serialize, Deserialize)]
struct ClassGroupFile {
    class: usize,
    units: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BlockParamsFile {
    Metric {
        weights: Vec<i64>,
    },
    Perceptron {
        weights: Vec<String>,
        bias: String,
        #[serde(default)]
        weights_decimal: Vec<f64>,
        #[serde(default)]
        bias_decimal: f64,
    },
    Sigmoid {
        hidden_size: usize,
        w_in: Vec<String>,
        b_hidden: Vec<String>,
        w_out: Vec<String>,
        b_out: String,
        #[serde(default)]
        w_in_decimal: Vec<f64>,
        #[serde(default)]
        b_hidden_decimal: Vec<f64>,
        #[serde(default)]
        w_out_decimal: Vec<f64>,
        #[serde(default)]
        b_out_decimal: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct BlockFile {
    first: usize,
    second: usize,
    #[serde(flatten)]
    params: BlockParamsFile,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    dims: DimsFile,
    topology: String,
    unit_count: usize,
    unit_threshold: usize,
    binarize_threshold: f64,
    class_groups: Vec<ClassGroupFile>,
    blocks: Vec<BlockFile>,
}

fn hex_all(values: &[f64], what: &str, pair: PairKey) -> Result<Vec<String>> {
    values
        .iter()
        .map(|&v| {
            to_hex(v).map_err(|_| {
                Error::ModelSave(format!(
                    "block ({}, {}): non-finite value in {what}",
                    pair.0, pair.1
                ))
            })
        })
        .collect()
}

fn params_to_file(block: &PairBlock) -> Result<BlockParamsFile> {
    let pair = block.pair();
    Ok(match block.params() {
        BlockParams::Metric(w) => BlockParamsFile::Metric {
            weights: w.values().to_vec(),
        },
        BlockParams::Perceptron { weights, bias } => BlockParamsFile::Perceptron {
            weights: hex_all(weights, "weights", pair)?,
            bias: hex_all(&[*bias], "bias", pair)?.remove(0),
            weights_decimal: weights.clone(),
            bias_decimal: *bias,
        },
        BlockParams::SigmoidNet {
            hidden_size,
            w_in,
            b_hidden,
            w_out,
            b_out,
        } => BlockParamsFile::Sigmoid {
            hidden_size: *hidden_size,
            w_in: hex_all(w_in, "w_in", pair)?,
            b_hidden: hex_all(b_hidden, "b_hidden", pair)?,
            w_out: hex_all(w_out, "w_out", pair)?,
            b_out: hex_all(&[*b_out], "b_out", pair)?.remove(0),
            w_in_decimal: w_in.clone(),
            b_hidden_decimal: b_hidden.clone(),
            w_out_decimal: w_out.clone(),
            b_out_decimal: *b_out,
        },
    })
}

fn unhex_all(values: &[String], what: &str, pair: PairKey) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|s| {
            from_hex(s).map_err(|e| {
                Error::ModelLoad(format!("block ({}, {}) {what}: {e}", pair.0, pair.1))
            })
        })
        .collect()
}

fn file_to_block(dims: Dims, file: &BlockFile) -> Result<PairBlock> {
    let pair = (file.first, file.second);
    let block_err = |e: Error| Error::ModelLoad(format!("block ({}, {}): {e}", pair.0, pair.1));
    match &file.params {
        BlockParamsFile::Metric { weights } => {
            let grid = WeightGrid::new(dims, weights.clone()).map_err(block_err)?;
            PairBlock::metric(pair, grid).map_err(block_err)
        }
        BlockParamsFile::Perceptron { weights, bias, .. } => {
            let weights = unhex_all(weights, "weights", pair)?;
            let bias = unhex_all(std::slice::from_ref(bias), "bias", pair)?[0];
            PairBlock::perceptron(pair, dims, weights, bias).map_err(block_err)
        }
        BlockParamsFile::Sigmoid {
            hidden_size,
            w_in,
            b_hidden,
            w_out,
            b_out,
            ..
        } => {
            let w_in = unhex_all(w_in, "w_in", pair)?;
            let b_hidden = unhex_all(b_hidden, "b_hidden", pair)?;
            let w_out = unhex_all(w_out, "w_out", pair)?;
            let b_out = unhex_all(std::slice::from_ref(b_out), "b_out", pair)?[0];
            PairBlock::sigmoid_net(pair, dims, *hidden_size, w_in, b_hidden, w_out, b_out)
                .map_err(block_err)
        }
    }
}

/// Renders a model as its JSON document.
pub fn model_to_json(model: &SavedModel) -> Result<String> {
    let e = &model.ensemble;
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        dims: DimsFile {
            cols: e.dims().cols,
            rows: e.dims().rows,
        },
        topology: e.variant().name().to_string(),
        unit_count: e.unit_count(),
        unit_threshold: e.unit_threshold(),
        binarize_threshold: model.binarize_threshold,
        class_groups: e
            .class_groups()
            .iter()
            .map(|(&class, units)| ClassGroupFile {
                class,
                units: units.iter().copied().collect(),
            })
            .collect(),
        blocks: e
            .blocks()
            .iter()
            .map(|(&(first, second), block)| {
                Ok(BlockFile {
                    first,
                    second,
                    params: params_to_file(block)?,
                })
            })
            .collect::<Result<_>>()?,
    };
    let mut text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::ModelSave(format!("cannot render document: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Parses and fully validates a model document.
pub fn model_from_json(text: &str) -> Result<SavedModel> {
    let file: ModelFile = serde_json::from_str(text)
        .map_err(|e| Error::ModelLoad(format!("malformed document: {e}")))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::ModelLoad(format!(
            "unsupported format_version {}, this build reads {FORMAT_VERSION}",
            file.format_version
        )));
    }
    let variant = match file.topology.as_str() {
        "full" => TopologyVariant::Full,
        "compressed" => TopologyVariant::Compressed,
        other => {
            return Err(Error::ModelLoad(format!(
                "unknown topology {other:?}, expected \"full\" or \"compressed\""
            )))
        }
    };
    let n = file.unit_count;
    if n < 2 {
        return Err(Error::ModelLoad(format!("unit_count {n} is below 2")));
    }
    if file.unit_threshold + 1 != n {
        return Err(Error::ModelLoad(format!(
            "unit_threshold {} violates the all-wins rule (must be unit_count - 1 = {})",
            file.unit_threshold,
            n - 1
        )));
    }
    let expected = expected_block_count(n, variant).map_err(|e| Error::ModelLoad(e.to_string()))?;
    if file.blocks.len() != expected {
        let formula = match variant {
            TopologyVariant::Full => "(N-1)N",
            TopologyVariant::Compressed => "N(N-1)/2",
        };
        return Err(Error::ModelLoad(format!(
            "block count {} does not match {formula} = {expected} for unit_count {n}",
            file.blocks.len()
        )));
    }
    if !(0.0..=1.0).contains(&file.binarize_threshold) {
        return Err(Error::ModelLoad(format!(
            "binarize_threshold {} outside [0, 1]",
            file.binarize_threshold
        )));
    }
    let dims = Dims::new(file.dims.cols, file.dims.rows);
    if dims.cols == 0 || dims.rows == 0 {
        return Err(Error::ModelLoad(format!("empty dims {dims}")));
    }

    let mut class_groups: BTreeMap<ClassId, BTreeSet<usize>> = BTreeMap::new();
    for group in &file.class_groups {
        if class_groups
            .insert(group.class, group.units.iter().copied().collect())
            .is_some()
        {
            return Err(Error::ModelLoad(format!(
                "class {} appears twice in class_groups",
                group.class
            )));
        }
    }

    let mut blocks: BTreeMap<PairKey, PairBlock> = BTreeMap::new();
    for bf in &file.blocks {
        let key = (bf.first, bf.second);
        if blocks.insert(key, file_to_block(dims, bf)?).is_some() {
            return Err(Error::ModelLoad(format!(
                "block ({}, {}) appears twice",
                key.0, key.1
            )));
        }
    }

    let ensemble = assemble(blocks, class_groups, variant, dims)
        .map_err(|e| Error::ModelLoad(e.to_string()))?;
    if ensemble.unit_count() != n {
        return Err(Error::ModelLoad(format!(
            "unit_count {n} does not match the {} units in class_groups",
            ensemble.unit_count()
        )));
    }
    Ok(SavedModel {
        ensemble,
        binarize_threshold: file.binarize_threshold,
    })
}

/// Writes a model file.
pub fn save_model(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

/// Reads and validates a model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let bytes = fs::read(path)?;
    let text =
        String::from_utf8(bytes).map_err(|_| Error::ModelLoad("file is not valid UTF-8".into()))?;
    model_from_json(&text)
}

/// Canonical serialized form of one block's parameters, for byte-level
/// change detection.
pub fn block_param_bytes(block: &PairBlock) -> Result<Vec<u8>> {
    serde_json::to_vec(&params_to_file(block)?)
        .map_err(|e| Error::ModelSave(format!("cannot render block parameters: {e}")))
}
