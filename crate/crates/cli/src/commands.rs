//! Command implementations. Every command writes its report to the given
//! sink and returns an error instead of printing one; `main` owns the
//! error channel and the exit code.

use crate::args::*;
use crate::seed::{block_seed, STREAM_INIT, STREAM_SHUFFLE};
use pairnet_core::block::{
    init_block, train_block, BlockParams, KindSpec, PairBlock, TrainConfig, TrainReport,
};
use pairnet_core::ensemble::{Ensemble, PairKey, TopologyVariant};
use pairnet_core::error::{Error, Result};
use pairnet_core::grid::{Dataset, ImageGrid};
use pairnet_core::io::glyph_text::{load_glyphs, save_glyphs};
use pairnet_core::io::model::{block_param_bytes, load_model, save_model, SavedModel};
use pairnet_core::metric::pair_weights_from_samples;
use pairnet_core::{glyph_dataset, metric_ensemble};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::BuildMetric(a) => cmd_build_metric(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::AddClass(a) => cmd_add_class(&a, out),
        Command::GenGlyphs(a) => cmd_gen_glyphs(&a, out),
        Command::Inspect(a) => cmd_inspect(&a, out),
    }
}

fn title_name(variant: TopologyVariant) -> &'static str {
    match variant {
        TopologyVariant::Full => "Full",
        TopologyVariant::Compressed => "Compressed",
    }
}

fn count_formula(variant: TopologyVariant) -> &'static str {
    match variant {
        TopologyVariant::Full => "(N-1)N",
        TopologyVariant::Compressed => "N(N-1)/2",
    }
}

pub fn cmd_build_metric(args: &BuildMetricArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = args.data.load()?;
    let variant = args.topology.variant();
    let ensemble = metric_ensemble(&dataset.items, variant)?;
    let model = SavedModel {
        ensemble,
        binarize_threshold: args.data.binarize_threshold,
    };
    save_model(&model, &args.out)?;
    let e = &model.ensemble;
    writeln!(out, "{} units, {} classes", e.unit_count(), e.class_count())?;
    writeln!(out, "{} blocks ({})", e.blocks().len(), variant.name())?;
    writeln!(out, "saved to {}", args.out.display())?;
    Ok(())
}

/// One block's training assignment: the pair key plus the example sets for
/// its two sides.
struct Job<'d> {
    key: PairKey,
    pos: Vec<&'d ImageGrid>,
    neg: Vec<&'d ImageGrid>,
}

fn class_examples(dataset: &Dataset) -> Result<Vec<Vec<&ImageGrid>>> {
    let k = dataset.class_count;
    let per_class: Vec<Vec<&ImageGrid>> = (0..k)
        .map(|label| dataset.grids_with_label(label))
        .collect();
    let missing: Vec<String> = (0..k)
        .filter(|&label| per_class[label].is_empty())
        .map(|label| label.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no examples for classes {}",
            missing.join(", ")
        )));
    }
    Ok(per_class)
}

fn train_config(kind: KindArg, args: &TrainArgs) -> TrainConfig {
    let mut cfg = match kind {
        KindArg::Perceptron => TrainConfig::perceptron(),
        KindArg::Sigmoid => TrainConfig::gradient_descent(),
    };
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    cfg.max_epochs = args.max_epochs;
    cfg.init_scale = args.init_scale;
    cfg.target_train_errors = args.target_errors;
    cfg
}

fn kind_spec(kind: KindArg, hidden_size: usize) -> KindSpec {
    match kind {
        KindArg::Perceptron => KindSpec::Perceptron,
        KindArg::Sigmoid => KindSpec::SigmoidNet { hidden_size },
    }
}

/// Trains every job in parallel; results come back keyed and are reported
/// in pair-key order no matter which thread finished first.
fn train_jobs(
    jobs: Vec<Job<'_>>,
    spec: KindSpec,
    base_cfg: &TrainConfig,
    dims: pairnet_core::grid::Dims,
    global_seed: u64,
) -> Result<BTreeMap<PairKey, (PairBlock, TrainReport)>> {
    let results: Vec<(PairKey, Result<(PairBlock, TrainReport)>)> = jobs
        .par_iter()
        .map(|job| {
            let run = || {
                let mut cfg = *base_cfg;
                cfg.init_seed = block_seed(global_seed, job.key, STREAM_INIT);
                cfg.shuffle_seed = block_seed(global_seed, job.key, STREAM_SHUFFLE);
                let fresh = init_block(job.key, spec, dims, cfg.init_seed, cfg.init_scale)?;
                train_block(&fresh, &job.pos, &job.neg, &cfg)
            };
            (job.key, run())
        })
        .collect();
    let mut trained = BTreeMap::new();
    for (key, result) in results {
        trained.insert(key, result?);
    }
    Ok(trained)
}

fn report_line(out: &mut dyn Write, key: PairKey, report: &TrainReport) -> Result<()> {
    if report.converged {
        writeln!(
            out,
            "block ({}, {}): converged in {} epochs ({} errors)",
            key.0, key.1, report.epochs_run, report.final_train_errors
        )?;
    } else {
        writeln!(
            out,
            "block ({}, {}): not converged after {} epochs ({} errors)",
            key.0, key.1, report.epochs_run, report.final_train_errors
        )?;
    }
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = args.data.load()?;
    let k = dataset.class_count;
    if k < 2 {
        return Err(Error::Config("need at least 2 classes".into()));
    }
    let per_class = class_examples(&dataset)?;
    let variant = args.topology.variant();

    let mut jobs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            jobs.push(Job {
                key: (i, j),
                pos: per_class[i].clone(),
                neg: per_class[j].clone(),
            });
            if variant == TopologyVariant::Full {
                jobs.push(Job {
                    key: (j, i),
                    pos: per_class[j].clone(),
                    neg: per_class[i].clone(),
                });
            }
        }
    }

    let spec = kind_spec(args.kind, args.hidden_size);
    let cfg = train_config(args.kind, args);
    let trained = train_jobs(jobs, spec, &cfg, dataset.dims, args.seed)?;

    let mut stubborn = 0usize;
    for (key, (_, report)) in &trained {
        report_line(out, *key, report)?;
        if !report.converged {
            stubborn += 1;
        }
    }
    if stubborn > 0 {
        writeln!(
            out,
            "warning: {stubborn} of {} blocks did not converge",
            trained.len()
        )?;
    }

    let blocks: BTreeMap<PairKey, PairBlock> = trained
        .into_iter()
        .map(|(key, (block, _))| (key, block))
        .collect();
    let groups: BTreeMap<_, _> = (0..k).map(|c| (c, BTreeSet::from([c]))).collect();
    let ensemble = pairnet_core::ensemble::assemble(blocks, groups, variant, dataset.dims)?;
    let model = SavedModel {
        ensemble,
        binarize_threshold: args.data.binarize_threshold,
    };
    save_model(&model, &args.out)?;
    writeln!(
        out,
        "{} blocks ({})",
        model.ensemble.blocks().len(),
        variant.name()
    )?;
    writeln!(out, "saved to {}", args.out.display())?;
    Ok(())
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let dataset = load_glyphs(&args.input)?;
    let input = &dataset.items[0].grid;
    let decision = model.ensemble.predict(input)?;
    if args.fallback {
        let (class, tie) = model.ensemble.predict_max_vote(input)?;
        writeln!(out, "Class({class})")?;
        writeln!(out, "votes: {:?}", decision.votes)?;
        writeln!(out, "tie: {tie}")?;
    } else {
        writeln!(out, "{}", decision.outcome)?;
        writeln!(out, "votes: {:?}", decision.votes)?;
    }
    Ok(())
}

/// Evaluation tallies. Serialization order is the report schema.
#[derive(Serialize)]
struct EvalReport {
    total: usize,
    correct: usize,
    no_decision: usize,
    ambiguous: usize,
    strict_acc: f64,
    fallback_acc: f64,
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let dataset = args.data.load()?;
    let mut correct = 0usize;
    let mut wrong = 0usize;
    let mut no_decision = 0usize;
    let mut ambiguous = 0usize;
    let mut fallback_correct = 0usize;
    for item in &dataset.items {
        let decision = model.ensemble.predict(&item.grid)?;
        match decision.outcome {
            pairnet_core::ensemble::Outcome::Class(k) if k == item.label => correct += 1,
            pairnet_core::ensemble::Outcome::Class(_) => wrong += 1,
            pairnet_core::ensemble::Outcome::NoDecision => no_decision += 1,
            pairnet_core::ensemble::Outcome::Ambiguous(_) => ambiguous += 1,
        }
        let (class, _) = model.ensemble.predict_max_vote(&item.grid)?;
        if class == item.label {
            fallback_correct += 1;
        }
    }
    let total = dataset.items.len();
    let report = EvalReport {
        total,
        correct,
        no_decision,
        ambiguous,
        strict_acc: correct as f64 / total as f64,
        fallback_acc: fallback_correct as f64 / total as f64,
    };
    match args.report {
        ReportFormat::Text => {
            writeln!(out, "total: {}", report.total)?;
            writeln!(out, "correct: {}", report.correct)?;
            writeln!(out, "wrong: {wrong}")?;
            writeln!(out, "no_decision: {}", report.no_decision)?;
            writeln!(out, "ambiguous: {}", report.ambiguous)?;
            writeln!(out, "strict_acc: {:.4}", report.strict_acc)?;
            writeln!(out, "fallback_acc: {:.4}", report.fallback_acc)?;
        }
        ReportFormat::Jsonl => {
            let line = serde_json::to_string(&report)
                .map_err(|e| Error::Config(format!("cannot render report: {e}")))?;
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// The single block kind used throughout a model, or an error for mixed
/// models (growth would not know what to train).
fn uniform_kind(ensemble: &Ensemble) -> Result<&'static str> {
    let mut kinds: BTreeSet<&'static str> =
        ensemble.blocks().values().map(|b| b.kind_name()).collect();
    if kinds.len() != 1 {
        return Err(Error::Growth(format!(
            "model mixes block kinds {:?}; growth needs a uniform kind",
            kinds
        )));
    }
    Ok(kinds.pop_first().unwrap())
}

/// Metric growth: the dataset must restate every existing unit's sample,
/// in unit order, followed by exactly one new sample. The restated samples
/// are verified by rebuilding each stored block's weights from them.
fn metric_growth_blocks(
    model: &SavedModel,
    dataset: &Dataset,
) -> Result<(BTreeMap<PairKey, PairBlock>, usize)> {
    let e = &model.ensemble;
    let n = e.unit_count();
    if dataset.items.len() != n + 1 {
        return Err(Error::Growth(format!(
            "metric growth needs the {n} existing unit samples in unit order plus 1 new sample, got {} records",
            dataset.items.len()
        )));
    }
    for (unit, item) in dataset.items[..n].iter().enumerate() {
        if item.label != e.class_of_unit(unit) {
            return Err(Error::Growth(format!(
                "record {unit} is labeled {} but unit {unit} belongs to class {}",
                item.label,
                e.class_of_unit(unit)
            )));
        }
    }
    // the restated samples must reproduce every stored block bit for bit
    for (&(i, j), block) in e.blocks() {
        let rebuilt = pair_weights_from_samples(&dataset.items[i].grid, &dataset.items[j].grid)?;
        let stored = match block.params() {
            BlockParams::Metric(w) => w,
            _ => unreachable!("uniform_kind checked metric"),
        };
        if rebuilt.values() != stored.values() {
            return Err(Error::Growth(format!(
                "records {i} and {j} do not reproduce block ({i}, {j}); metric growth needs the original unit samples"
            )));
        }
    }
    let new_item = &dataset.items[n];
    if new_item.label > e.class_count() {
        return Err(Error::Growth(format!(
            "new sample is labeled {}, expected an existing class or the next id {}",
            new_item.label,
            e.class_count()
        )));
    }
    let mut new_blocks = BTreeMap::new();
    for i in 0..n {
        let w = pair_weights_from_samples(&dataset.items[i].grid, &new_item.grid)?;
        if e.variant() == TopologyVariant::Full {
            new_blocks.insert((n, i), PairBlock::metric((n, i), w.negated())?);
        }
        new_blocks.insert((i, n), PairBlock::metric((i, n), w)?);
    }
    Ok((new_blocks, new_item.label))
}

/// Trained growth: the highest label names the new class; blocks pairing it
/// against each existing unit's class are trained from the dataset.
fn trained_growth_blocks(
    model: &SavedModel,
    dataset: &Dataset,
    kind: &str,
    args: &AddClassArgs,
    out: &mut dyn Write,
) -> Result<(BTreeMap<PairKey, PairBlock>, usize)> {
    let e = &model.ensemble;
    let n = e.unit_count();
    let new_class = dataset
        .class_count
        .checked_sub(1)
        .ok_or(Error::EmptyDataset)?;
    if new_class != e.class_count() {
        return Err(Error::Growth(format!(
            "highest label {new_class} must be the next class id {}",
            e.class_count()
        )));
    }
    let new_examples = dataset.grids_with_label(new_class);
    let mut unpaired: Vec<PairKey> = Vec::new();
    let mut absent: BTreeSet<usize> = BTreeSet::new();
    for unit in 0..n {
        if dataset.grids_with_label(e.class_of_unit(unit)).is_empty() {
            unpaired.push((unit, n));
            absent.insert(e.class_of_unit(unit));
        }
    }
    if new_examples.is_empty() {
        return Err(Error::Growth(format!(
            "no examples for the new class {new_class}"
        )));
    }
    if !unpaired.is_empty() {
        let pairs: Vec<String> = unpaired
            .iter()
            .map(|(i, j)| format!("({i}, {j})"))
            .collect();
        let classes: Vec<String> = absent.iter().map(|c| c.to_string()).collect();
        return Err(Error::Growth(format!(
            "cannot train blocks for pairs {}; dataset lacks examples for classes {}",
            pairs.join(", "),
            classes.join(", ")
        )));
    }

    let spec = match kind {
        "perceptron" => KindSpec::Perceptron,
        "sigmoid" => {
            // reuse the width of the existing blocks
            let hidden = e
                .blocks()
                .values()
                .find_map(|b| match b.params() {
                    BlockParams::SigmoidNet { hidden_size, .. } => Some(*hidden_size),
                    _ => None,
                })
                .expect("uniform_kind checked sigmoid");
            KindSpec::SigmoidNet {
                hidden_size: hidden,
            }
        }
        other => return Err(Error::Growth(format!("kind {other} cannot be grown"))),
    };
    let mut cfg = match kind {
        "perceptron" => TrainConfig::perceptron(),
        _ => TrainConfig::gradient_descent(),
    };
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    cfg.max_epochs = args.max_epochs;
    cfg.init_scale = args.init_scale;
    cfg.target_train_errors = args.target_errors;

    let mut jobs = Vec::new();
    for unit in 0..n {
        let old_examples = dataset.grids_with_label(e.class_of_unit(unit));
        jobs.push(Job {
            key: (unit, n),
            pos: old_examples.clone(),
            neg: new_examples.clone(),
        });
        if e.variant() == TopologyVariant::Full {
            jobs.push(Job {
                key: (n, unit),
                pos: new_examples.clone(),
                neg: old_examples,
            });
        }
    }
    let trained = train_jobs(jobs, spec, &cfg, e.dims(), args.seed)?;
    let mut stubborn = 0usize;
    for (key, (_, report)) in &trained {
        report_line(out, *key, report)?;
        if !report.converged {
            stubborn += 1;
        }
    }
    if stubborn > 0 {
        writeln!(
            out,
            "warning: {stubborn} of {} blocks did not converge",
            trained.len()
        )?;
    }
    let new_blocks = trained
        .into_iter()
        .map(|(key, (block, _))| (key, block))
        .collect();
    Ok((new_blocks, new_class))
}

pub fn cmd_add_class(args: &AddClassArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let dataset = args.data.load()?;
    if dataset.dims != model.ensemble.dims() {
        return Err(Error::DimensionMismatch {
            expected: model.ensemble.dims(),
            actual: dataset.dims,
        });
    }
    let kind = uniform_kind(&model.ensemble)?;
    let (new_blocks, class) = if kind == "metric" {
        metric_growth_blocks(&model, &dataset)?
    } else {
        trained_growth_blocks(&model, &dataset, kind, args, out)?
    };

    let before: Vec<(PairKey, Vec<u8>)> = model
        .ensemble
        .blocks()
        .iter()
        .map(|(&key, block)| Ok((key, block_param_bytes(block)?)))
        .collect::<Result<_>>()?;
    let added = new_blocks.len();
    let grown = model.ensemble.add_class(new_blocks, class)?;

    for (key, bytes) in &before {
        if &block_param_bytes(&grown.blocks()[key])? != bytes {
            return Err(Error::Growth(format!(
                "internal check failed: block ({}, {}) changed during growth",
                key.0, key.1
            )));
        }
    }

    let out_model = SavedModel {
        ensemble: grown,
        binarize_threshold: model.binarize_threshold,
    };
    save_model(&out_model, &args.out)?;
    writeln!(
        out,
        "added {added} blocks; threshold {} -> {}",
        model.ensemble.unit_threshold(),
        out_model.ensemble.unit_threshold()
    )?;
    writeln!(out, "previous parameters unchanged: OK")?;
    writeln!(out, "saved to {}", args.out.display())?;
    Ok(())
}

pub fn cmd_gen_glyphs(args: &GenGlyphsArgs, out: &mut dyn Write) -> Result<()> {
    let dataset = glyph_dataset(args.classes, args.samples_per_class, args.noise, args.seed)?;
    save_glyphs(&dataset, &args.out)?;
    writeln!(
        out,
        "wrote {} glyphs ({} classes) to {}",
        dataset.items.len(),
        args.classes,
        args.out.display()
    )?;
    Ok(())
}

pub fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&args.model)?;
    let e = &model.ensemble;
    writeln!(
        out,
        "{}, N={}, B={}, blocks={} (matches {})",
        title_name(e.variant()),
        e.unit_count(),
        e.unit_threshold(),
        e.blocks().len(),
        count_formula(e.variant())
    )?;
    writeln!(out, "binarize threshold: {}", model.binarize_threshold)?;
    for (class, units) in e.class_groups() {
        let list: Vec<usize> = units.iter().copied().collect();
        writeln!(out, "class {class}: units {list:?}")?;
    }
    for (key, block) in e.blocks() {
        writeln!(out, "block ({}, {}): {}", key.0, key.1, block.kind_name())?;
    }
    Ok(())
}
