//! Pairwise decision blocks: the unit that separates class i from class j
//! and emits a single bit, where 1 means "the input belongs to class i".
//!
//! Three kinds share one interface. Metric blocks carry analytically built
//! integer weights and never train. Perceptron blocks are a thresholded
//! affine map trained by the classic mistake-driven rule. SigmoidNet blocks
//! are one sigmoid hidden layer plus a sigmoid output trained by full-batch
//! gradient descent on mean squared error, binarized at 0.5.

use crate::error::{Error, Result};
use crate::grid::{ClassId, Dims, ImageGrid};
use crate::metric::{threshold_fire, weighted_sum, WeightGrid};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Block kind selector for [`init_block`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindSpec {
    Perceptron,
    SigmoidNet { hidden_size: usize },
}

/// Parameters of one block.
///
/// Trainable kinds flatten to a single vector (see [`params_vec`]) in a fixed
/// order: Perceptron is cell weights (row-major) then bias; SigmoidNet is
/// input-to-hidden weights (hidden-major, cells within), hidden biases,
/// hidden-to-output weights, output bias. Initialization draws in the same
/// order, so a seed pins every parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockParams {
    Metric(WeightGrid),
    Perceptron {
        weights: Vec<f64>,
        bias: f64,
    },
    SigmoidNet {
        hidden_size: usize,
        w_in: Vec<f64>,
        b_hidden: Vec<f64>,
        w_out: Vec<f64>,
        b_out: f64,
    },
}

/// One pairwise unit. `pair.0` is the class its set bit votes for.
///
/// In analytically built networks the pair identifies sample units; in
/// trained networks it identifies classes. Both are small indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PairBlock {
    pair: (ClassId, ClassId),
    dims: Dims,
    params: BlockParams,
}

impl PairBlock {
    pub fn metric(pair: (ClassId, ClassId), weights: WeightGrid) -> Result<PairBlock> {
        Self::check_pair(pair)?;
        Ok(PairBlock {
            pair,
            dims: weights.dims(),
            params: BlockParams::Metric(weights),
        })
    }

    pub fn perceptron(
        pair: (ClassId, ClassId),
        dims: Dims,
        weights: Vec<f64>,
        bias: f64,
    ) -> Result<PairBlock> {
        Self::check_pair(pair)?;
        if weights.len() != dims.cell_count() {
            return Err(Error::CellCount {
                dims,
                len: weights.len(),
            });
        }
        Ok(PairBlock {
            pair,
            dims,
            params: BlockParams::Perceptron { weights, bias },
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn sigmoid_net(
        pair: (ClassId, ClassId),
        dims: Dims,
        hidden_size: usize,
        w_in: Vec<f64>,
        b_hidden: Vec<f64>,
        w_out: Vec<f64>,
        b_out: f64,
    ) -> Result<PairBlock> {
        Self::check_pair(pair)?;
        if hidden_size == 0 {
            return Err(Error::Config("hidden_size must be at least 1".into()));
        }
        let cells = dims.cell_count();
        if w_in.len() != hidden_size * cells {
            return Err(Error::Config(format!(
                "w_in length {} does not match hidden_size {hidden_size} x {cells} cells",
                w_in.len()
            )));
        }
        if b_hidden.len() != hidden_size || w_out.len() != hidden_size {
            return Err(Error::Config(format!(
                "hidden parameter lengths {}/{} do not match hidden_size {hidden_size}",
                b_hidden.len(),
                w_out.len()
            )));
        }
        Ok(PairBlock {
            pair,
            dims,
            params: BlockParams::SigmoidNet {
                hidden_size,
                w_in,
                b_hidden,
                w_out,
                b_out,
            },
        })
    }

    fn check_pair(pair: (ClassId, ClassId)) -> Result<()> {
        if pair.0 == pair.1 {
            return Err(Error::Config(format!(
                "a block must separate two distinct identifiers, got ({}, {})",
                pair.0, pair.1
            )));
        }
        Ok(())
    }

    pub fn pair(&self) -> (ClassId, ClassId) {
        self.pair
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    pub fn kind_name(&self) -> &'static str {
        match self.params {
            BlockParams::Metric(_) => "metric",
            BlockParams::Perceptron { .. } => "perceptron",
            BlockParams::SigmoidNet { .. } => "sigmoid",
        }
    }

    pub fn is_trainable(&self) -> bool {
        !matches!(self.params, BlockParams::Metric(_))
    }
}

/// Training algorithm selector. Each applies to exactly one trainable kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    /// Mistake-driven updates for Perceptron blocks.
    PerceptronRule,
    /// Full-batch descent on mean squared error for SigmoidNet blocks.
    GradientDescent,
}

/// Everything a training run depends on. Two runs with equal configs and
/// equal inputs produce bit-identical blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub shuffle_seed: u64,
    pub init_seed: u64,
    pub init_scale: f64,
    /// Stop once the epoch-end error count drops to this value.
    pub target_train_errors: usize,
}

impl TrainConfig {
    pub fn perceptron() -> TrainConfig {
        TrainConfig {
            algorithm: Algorithm::PerceptronRule,
            learning_rate: 0.5,
            max_epochs: 1000,
            shuffle_seed: 0,
            init_seed: 0,
            init_scale: 0.1,
            target_train_errors: 0,
        }
    }

    pub fn gradient_descent() -> TrainConfig {
        TrainConfig {
            algorithm: Algorithm::GradientDescent,
            learning_rate: 0.1,
            ..TrainConfig::perceptron()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || self.learning_rate.is_nan() {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.init_scale < 0.0 || self.init_scale.is_nan() {
            return Err(Error::Config(format!(
                "init_scale must be nonnegative, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

/// What a training run did.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_train_errors: usize,
    pub converged: bool,
    /// Epoch-end loss values; gradient descent only, empty otherwise.
    pub loss_trace: Vec<f64>,
}

/// Creates a block with parameters drawn uniformly from
/// `[-init_scale, +init_scale]`, deterministically for a fixed seed.
pub fn init_block(
    pair: (ClassId, ClassId),
    kind: KindSpec,
    dims: Dims,
    init_seed: u64,
    init_scale: f64,
) -> Result<PairBlock> {
    if dims.cols == 0 || dims.rows == 0 {
        return Err(Error::EmptyGrid);
    }
    if init_scale < 0.0 || init_scale.is_nan() {
        return Err(Error::Config(format!(
            "init_scale must be nonnegative, got {init_scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(init_seed);
    let mut draw = |n: usize| -> Vec<f64> {
        if init_scale == 0.0 {
            vec![0.0; n]
        } else {
            (0..n)
                .map(|_| rng.random_range(-init_scale..=init_scale))
                .collect()
        }
    };
    let cells = dims.cell_count();
    match kind {
        KindSpec::Perceptron => {
            let weights = draw(cells);
            let bias = draw(1)[0];
            PairBlock::perceptron(pair, dims, weights, bias)
        }
        KindSpec::SigmoidNet { hidden_size } => {
            if hidden_size == 0 {
                return Err(Error::Config("hidden_size must be at least 1".into()));
            }
            let w_in = draw(hidden_size * cells);
            let b_hidden = draw(hidden_size);
            let w_out = draw(hidden_size);
            let b_out = draw(1)[0];
            PairBlock::sigmoid_net(pair, dims, hidden_size, w_in, b_hidden, w_out, b_out)
        }
    }
}

/// Pre-binarizer output: the raw weighted sum (Metric), the affine sum
/// (Perceptron), or the output sigmoid value in (0, 1) (SigmoidNet).
pub fn block_raw_output(block: &PairBlock, input: &ImageGrid) -> Result<f64> {
    if block.dims != input.dims() {
        return Err(Error::DimensionMismatch {
            expected: block.dims,
            actual: input.dims(),
        });
    }
    match &block.params {
        BlockParams::Metric(w) => Ok(weighted_sum(w, input)? as f64),
        BlockParams::Perceptron { weights, bias } => Ok(affine(weights, *bias, input)),
        BlockParams::SigmoidNet {
            hidden_size,
            w_in,
            b_hidden,
            w_out,
            b_out,
        } => {
            let cells = block.dims.cell_count();
            let mut z_out = *b_out;
            for h in 0..*hidden_size {
                let z_h = affine(&w_in[h * cells..(h + 1) * cells], b_hidden[h], input);
                z_out += w_out[h] * sigmoid(z_h);
            }
            Ok(sigmoid(z_out))
        }
    }
}

fn affine(weights: &[f64], bias: f64, input: &ImageGrid) -> f64 {
    let mut sum = bias;
    for (w, &x) in weights.iter().zip(input.cells()) {
        if x {
            sum += w;
        }
    }
    sum
}

/// The block's bit. 1 votes for `pair.0`.
///
/// Boundaries never fire: Metric at raw 0, Perceptron at raw 0, SigmoidNet
/// at raw 0.5 all emit 0.
pub fn block_bit(block: &PairBlock, input: &ImageGrid) -> Result<bool> {
    let raw = block_raw_output(block, input)?;
    Ok(match block.params {
        BlockParams::Metric(_) => threshold_fire(raw as i64),
        BlockParams::Perceptron { .. } => raw > 0.0,
        BlockParams::SigmoidNet { .. } => raw > 0.5,
    })
}

/// Flattened parameters of a trainable block, in the documented order.
pub fn params_vec(block: &PairBlock) -> Result<Vec<f64>> {
    match &block.params {
        BlockParams::Metric(_) => Err(Error::NotTrainable(block.pair.0, block.pair.1)),
        BlockParams::Perceptron { weights, bias } => {
            let mut v = weights.clone();
            v.push(*bias);
            Ok(v)
        }
        BlockParams::SigmoidNet {
            w_in,
            b_hidden,
            w_out,
            b_out,
            ..
        } => {
            let mut v = w_in.clone();
            v.extend_from_slice(b_hidden);
            v.extend_from_slice(w_out);
            v.push(*b_out);
            Ok(v)
        }
    }
}

/// Rebuilds a block of the same kind and shape from a flattened parameter
/// vector (inverse of [`params_vec`]).
pub fn with_params_vec(block: &PairBlock, v: &[f64]) -> Result<PairBlock> {
    match &block.params {
        BlockParams::Metric(_) => Err(Error::NotTrainable(block.pair.0, block.pair.1)),
        BlockParams::Perceptron { weights, .. } => {
            if v.len() != weights.len() + 1 {
                return Err(Error::Config(format!(
                    "parameter vector length {} does not match perceptron size {}",
                    v.len(),
                    weights.len() + 1
                )));
            }
            PairBlock::perceptron(
                block.pair,
                block.dims,
                v[..v.len() - 1].to_vec(),
                v[v.len() - 1],
            )
        }
        BlockParams::SigmoidNet {
            hidden_size,
            w_in,
            b_hidden,
            w_out,
            ..
        } => {
            let expect = w_in.len() + b_hidden.len() + w_out.len() + 1;
            if v.len() != expect {
                return Err(Error::Config(format!(
                    "parameter vector length {} does not match sigmoid-net size {expect}",
                    v.len()
                )));
            }
            let (a, rest) = v.split_at(w_in.len());
            let (b, rest) = rest.split_at(b_hidden.len());
            let (c, d) = rest.split_at(w_out.len());
            PairBlock::sigmoid_net(
                block.pair,
                block.dims,
                *hidden_size,
                a.to_vec(),
                b.to_vec(),
                c.to_vec(),
                d[0],
            )
        }
    }
}

struct Examples<'a> {
    grids: Vec<&'a ImageGrid>,
    targets: Vec<bool>,
}

fn collect_examples<'a>(
    block: &PairBlock,
    pos: &[&'a ImageGrid],
    neg: &[&'a ImageGrid],
) -> Result<Examples<'a>> {
    let (i, j) = block.pair;
    if pos.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no examples for class {i} of pair ({i}, {j})"
        )));
    }
    if neg.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no examples for class {j} of pair ({i}, {j})"
        )));
    }
    let mut grids = Vec::with_capacity(pos.len() + neg.len());
    let mut targets = Vec::with_capacity(pos.len() + neg.len());
    for (g, t) in pos
        .iter()
        .map(|&g| (g, true))
        .chain(neg.iter().map(|&g| (g, false)))
    {
        if g.dims() != block.dims {
            return Err(Error::DimensionMismatch {
                expected: block.dims,
                actual: g.dims(),
            });
        }
        grids.push(g);
        targets.push(t);
    }
    Ok(Examples { grids, targets })
}

/// Trains a block on the two classes it separates and nothing else.
///
/// `pos` holds examples of `pair.0` (target bit 1), `neg` of `pair.1`
/// (target bit 0). Runs until the epoch-end error count reaches
/// `target_train_errors` or `max_epochs` epochs have passed.
pub fn train_block(
    block: &PairBlock,
    pos: &[&ImageGrid],
    neg: &[&ImageGrid],
    cfg: &TrainConfig,
) -> Result<(PairBlock, TrainReport)> {
    cfg.validate()?;
    let ex = collect_examples(block, pos, neg)?;
    match (&block.params, cfg.algorithm) {
        (BlockParams::Metric(_), _) => Err(Error::NotTrainable(block.pair.0, block.pair.1)),
        (BlockParams::Perceptron { weights, bias }, Algorithm::PerceptronRule) => {
            let (params, report) = run_perceptron_rule(weights.clone(), *bias, &ex, cfg);
            let trained = PairBlock::perceptron(block.pair, block.dims, params.0, params.1)?;
            Ok((trained, report))
        }
        (BlockParams::SigmoidNet { .. }, Algorithm::GradientDescent) => {
            run_gradient_descent(block, &ex, cfg)
        }
        (BlockParams::Perceptron { .. }, Algorithm::GradientDescent) => Err(Error::Config(
            "gradient-descent trains sigmoid-net blocks; use the perceptron rule here".into(),
        )),
        (BlockParams::SigmoidNet { .. }, Algorithm::PerceptronRule) => Err(Error::Config(
            "the perceptron rule trains perceptron blocks; use gradient-descent here".into(),
        )),
    }
}

fn run_perceptron_rule(
    mut weights: Vec<f64>,
    mut bias: f64,
    ex: &Examples,
    cfg: &TrainConfig,
) -> ((Vec<f64>, f64), TrainReport) {
    let mut order: Vec<usize> = (0..ex.grids.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    let mut epochs_run = 0;
    let mut errors = count_affine_errors(&weights, bias, ex);
    while errors > cfg.target_train_errors && epochs_run < cfg.max_epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let x = ex.grids[idx];
            let raw = affine(&weights, bias, x);
            let bit = raw > 0.0;
            if bit != ex.targets[idx] {
                let step = if ex.targets[idx] {
                    cfg.learning_rate
                } else {
                    -cfg.learning_rate
                };
                for (c, &on) in x.cells().iter().enumerate() {
                    if on {
                        weights[c] += step;
                    }
                }
                bias += step;
            }
        }
        epochs_run += 1;
        errors = count_affine_errors(&weights, bias, ex);
    }
    let report = TrainReport {
        epochs_run,
        final_train_errors: errors,
        converged: errors <= cfg.target_train_errors,
        loss_trace: Vec::new(),
    };
    ((weights, bias), report)
}

fn count_affine_errors(weights: &[f64], bias: f64, ex: &Examples) -> usize {
    ex.grids
        .iter()
        .zip(&ex.targets)
        .filter(|(g, &t)| (affine(weights, bias, g) > 0.0) != t)
        .count()
}

fn run_gradient_descent(
    block: &PairBlock,
    ex: &Examples,
    cfg: &TrainConfig,
) -> Result<(PairBlock, TrainReport)> {
    let mut current = block.clone();
    let mut loss_trace = Vec::new();
    let mut epochs_run = 0;
    let mut errors = count_bit_errors(&current, ex)?;
    while errors > cfg.target_train_errors && epochs_run < cfg.max_epochs {
        let grad = sigmoid_batch_gradient(&current, ex)?;
        let mut params = params_vec(&current)?;
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= cfg.learning_rate * g;
        }
        current = with_params_vec(&current, &params)?;
        epochs_run += 1;
        loss_trace.push(sigmoid_batch_loss(&current, ex)?);
        errors = count_bit_errors(&current, ex)?;
    }
    let report = TrainReport {
        epochs_run,
        final_train_errors: errors,
        converged: errors <= cfg.target_train_errors,
        loss_trace,
    };
    Ok((current, report))
}

fn count_bit_errors(block: &PairBlock, ex: &Examples) -> Result<usize> {
    let mut errors = 0;
    for (g, &t) in ex.grids.iter().zip(&ex.targets) {
        if block_bit(block, g)? != t {
            errors += 1;
        }
    }
    Ok(errors)
}

/// Mean squared error of a SigmoidNet block against targets 1 (`pos`) and 0
/// (`neg`).
pub fn batch_loss(block: &PairBlock, pos: &[&ImageGrid], neg: &[&ImageGrid]) -> Result<f64> {
    let ex = collect_examples(block, pos, neg)?;
    sigmoid_batch_loss(block, &ex)
}

/// Analytic gradient of [`batch_loss`] with respect to the flattened
/// parameter vector (same order as [`params_vec`]).
pub fn batch_gradient(
    block: &PairBlock,
    pos: &[&ImageGrid],
    neg: &[&ImageGrid],
) -> Result<Vec<f64>> {
    let ex = collect_examples(block, pos, neg)?;
    sigmoid_batch_gradient(block, &ex)
}

fn sigmoid_batch_loss(block: &PairBlock, ex: &Examples) -> Result<f64> {
    require_sigmoid(block)?;
    let m = ex.grids.len() as f64;
    let mut loss = 0.0;
    for (g, &t) in ex.grids.iter().zip(&ex.targets) {
        let y = block_raw_output(block, g)?;
        let target = if t { 1.0 } else { 0.0 };
        loss += (y - target) * (y - target);
    }
    Ok(loss / m)
}

fn sigmoid_batch_gradient(block: &PairBlock, ex: &Examples) -> Result<Vec<f64>> {
    let BlockParams::SigmoidNet {
        hidden_size,
        w_in,
        b_hidden,
        w_out,
        b_out,
    } = &block.params
    else {
        return Err(require_sigmoid(block).unwrap_err());
    };
    let hidden = *hidden_size;
    let cells = block.dims.cell_count();
    let m = ex.grids.len() as f64;

    let mut g_w_in = vec![0.0; w_in.len()];
    let mut g_b_hidden = vec![0.0; hidden];
    let mut g_w_out = vec![0.0; hidden];
    let mut g_b_out = 0.0;
    let mut a_hidden = vec![0.0; hidden];

    for (x, &t) in ex.grids.iter().zip(&ex.targets) {
        let mut z_out = *b_out;
        for h in 0..hidden {
            let z_h = affine(&w_in[h * cells..(h + 1) * cells], b_hidden[h], x);
            a_hidden[h] = sigmoid(z_h);
            z_out += w_out[h] * a_hidden[h];
        }
        let y = sigmoid(z_out);
        let target = if t { 1.0 } else { 0.0 };
        // d(mean squared error)/d(z_out) for this example
        let delta_out = 2.0 * (y - target) * y * (1.0 - y) / m;
        g_b_out += delta_out;
        for h in 0..hidden {
            g_w_out[h] += delta_out * a_hidden[h];
            let delta_h = delta_out * w_out[h] * a_hidden[h] * (1.0 - a_hidden[h]);
            g_b_hidden[h] += delta_h;
            for (c, &on) in x.cells().iter().enumerate() {
                if on {
                    g_w_in[h * cells + c] += delta_h;
                }
            }
        }
    }

    let mut grad = g_w_in;
    grad.extend_from_slice(&g_b_hidden);
    grad.extend_from_slice(&g_w_out);
    grad.push(g_b_out);
    Ok(grad)
}

fn require_sigmoid(block: &PairBlock) -> Result<()> {
    match block.params {
        BlockParams::SigmoidNet { .. } => Ok(()),
        _ => Err(Error::Config(format!(
            "loss and gradient are defined for sigmoid-net blocks, not {}",
            block.kind_name()
        ))),
    }
}
