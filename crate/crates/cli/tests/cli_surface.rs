//! Command surface details: output wording, error wording, exit codes,
//! and cross-format flows not exercised by the acceptance suite.

use pairnet_core::block::PairBlock;
use pairnet_core::ensemble::{assemble, TopologyVariant};
use pairnet_core::grid::Dims;
use pairnet_core::io::model::{save_model, SavedModel};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::process::Command;

fn pairnet(dir: &Path, args: &[&str]) -> (bool, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_pairnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.success(),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn pairnet_ok(dir: &Path, args: &[&str]) -> String {
    let (ok, stdout, stderr) = pairnet(dir, args);
    assert!(ok, "command {args:?} failed:\n{stdout}{stderr}");
    stdout
}

fn pairnet_err(dir: &Path, args: &[&str]) -> String {
    let (ok, stdout, stderr) = pairnet(dir, args);
    assert!(!ok, "command {args:?} unexpectedly passed:\n{stdout}");
    assert!(
        stderr.starts_with("error: "),
        "stderr must carry the error prefix: {stderr}"
    );
    stderr
}

/// Three hand-set one-cell perceptron blocks whose bits cycle on the
/// active input: 0 beats 1, 1 beats 2, 2 beats 0.
fn cycle_model(dir: &Path) -> std::path::PathBuf {
    let dims = Dims::new(1, 1);
    let blocks: BTreeMap<_, _> = [((0usize, 1usize), 1.0f64), ((0, 2), -1.0), ((1, 2), 1.0)]
        .into_iter()
        .map(|(key, w)| (key, PairBlock::perceptron(key, dims, vec![w], 0.0).unwrap()))
        .collect();
    let class_groups: BTreeMap<usize, BTreeSet<usize>> =
        (0..3).map(|k| (k, BTreeSet::from([k]))).collect();
    let model = SavedModel {
        ensemble: assemble(blocks, class_groups, TopologyVariant::Compressed, dims).unwrap(),
        binarize_threshold: 0.5,
    };
    let path = dir.join("cycle.model");
    save_model(&model, &path).unwrap();
    fs::write(dir.join("on.glyphs"), "label 0\n#\n").unwrap();
    path
}

#[test]
fn predict_reports_a_cycle_as_no_decision() {
    let tmp = tempfile::tempdir().unwrap();
    cycle_model(tmp.path());
    let stdout = pairnet_ok(
        tmp.path(),
        &["predict", "--model", "cycle.model", "--input", "on.glyphs"],
    );
    assert_eq!(stdout, "NoDecision\nvotes: [1, 1, 1]\n");
}

#[test]
fn predict_fallback_breaks_the_cycle_toward_the_lowest_unit() {
    let tmp = tempfile::tempdir().unwrap();
    cycle_model(tmp.path());
    let stdout = pairnet_ok(
        tmp.path(),
        &[
            "predict",
            "--model",
            "cycle.model",
            "--input",
            "on.glyphs",
            "--fallback",
        ],
    );
    assert_eq!(stdout, "Class(0)\nvotes: [1, 1, 1]\ntie: true\n");
}

#[test]
fn inspect_names_the_full_count_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &["gen-glyphs", "--out", "abc.glyphs", "--classes", "3"],
    );
    pairnet_ok(
        dir,
        &[
            "build-metric",
            "--data",
            "abc.glyphs",
            "--out",
            "full.model",
            "--topology",
            "full",
        ],
    );
    let stdout = pairnet_ok(dir, &["inspect", "--model", "full.model"]);
    assert!(
        stdout.starts_with("Full, N=3, B=2, blocks=6 (matches (N-1)N)\n"),
        "{stdout}"
    );
}

#[test]
fn multi_sample_classes_get_one_unit_per_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &[
            "gen-glyphs",
            "--out",
            "two_each.glyphs",
            "--classes",
            "3",
            "--samples-per-class",
            "2",
            "--noise",
            "1",
        ],
    );
    let stdout = pairnet_ok(
        dir,
        &[
            "build-metric",
            "--data",
            "two_each.glyphs",
            "--out",
            "six.model",
        ],
    );
    assert!(stdout.contains("6 units, 3 classes"), "{stdout}");
    assert!(stdout.contains("15 blocks (compressed)"), "{stdout}");
    let inspected = pairnet_ok(dir, &["inspect", "--model", "six.model"]);
    assert!(inspected.contains("class 0: units [0, 1]"), "{inspected}");
    assert!(inspected.contains("class 2: units [4, 5]"), "{inspected}");
}

#[test]
fn gen_glyphs_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let args = [
        "gen-glyphs",
        "--out",
        "a.glyphs",
        "--classes",
        "5",
        "--samples-per-class",
        "4",
        "--noise",
        "3",
        "--seed",
        "77",
    ];
    pairnet_ok(dir, &args);
    let mut again = args;
    again[2] = "b.glyphs";
    pairnet_ok(dir, &again);
    assert_eq!(
        fs::read(dir.join("a.glyphs")).unwrap(),
        fs::read(dir.join("b.glyphs")).unwrap()
    );
}

#[test]
fn train_reads_idx_pairs_and_records_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // two 2x2 classes: left column bright vs right column bright
    let mut images: Vec<u8> = Vec::new();
    images.extend(0x0000_0803u32.to_be_bytes());
    images.extend(6u32.to_be_bytes());
    images.extend(2u32.to_be_bytes());
    images.extend(2u32.to_be_bytes());
    for _ in 0..3 {
        images.extend([250u8, 5, 250, 5]);
        images.extend([5u8, 250, 5, 250]);
    }
    let mut labels: Vec<u8> = Vec::new();
    labels.extend(0x0000_0801u32.to_be_bytes());
    labels.extend(6u32.to_be_bytes());
    labels.extend([0u8, 1, 0, 1, 0, 1]);
    fs::write(dir.join("img.idx"), &images).unwrap();
    fs::write(dir.join("lab.idx"), &labels).unwrap();

    let stdout = pairnet_ok(
        dir,
        &[
            "train",
            "--images",
            "img.idx",
            "--labels",
            "lab.idx",
            "--binarize-threshold",
            "0.25",
            "--out",
            "idx.model",
        ],
    );
    assert!(stdout.contains("block (0, 1): converged"), "{stdout}");
    let inspected = pairnet_ok(dir, &["inspect", "--model", "idx.model"]);
    assert!(
        inspected.contains("binarize threshold: 0.25"),
        "{inspected}"
    );
    assert!(
        inspected.contains("block (0, 1): perceptron"),
        "{inspected}"
    );
}

#[test]
fn add_class_names_untrainable_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &[
            "gen-glyphs",
            "--out",
            "train.glyphs",
            "--classes",
            "3",
            "--samples-per-class",
            "20",
            "--noise",
            "2",
        ],
    );
    pairnet_ok(
        dir,
        &["train", "--data", "train.glyphs", "--out", "m.model"],
    );
    // growth data with class-3 examples only: every pair lacks its old side
    let three = pairnet_core::glyph_dataset(4, 5, 2, 9).unwrap();
    let only_new = pairnet_core::grid::Dataset::new(
        4,
        three.dims,
        three.items.into_iter().filter(|it| it.label == 3).collect(),
    );
    pairnet_core::io::glyph_text::save_glyphs(&only_new, dir.join("new_only.glyphs")).unwrap();
    let stderr = pairnet_err(
        dir,
        &[
            "add-class",
            "--model",
            "m.model",
            "--data",
            "new_only.glyphs",
            "--out",
            "grown.model",
        ],
    );
    assert!(
        stderr.contains("cannot train blocks for pairs (0, 3), (1, 3), (2, 3)"),
        "{stderr}"
    );
    assert!(stderr.contains("classes 0, 1, 2"), "{stderr}");
}

#[test]
fn eval_rejects_an_empty_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &["gen-glyphs", "--out", "abc.glyphs", "--classes", "3"],
    );
    pairnet_ok(
        dir,
        &["build-metric", "--data", "abc.glyphs", "--out", "m.model"],
    );
    fs::write(dir.join("empty.glyphs"), "").unwrap();
    let stderr = pairnet_err(
        dir,
        &["eval", "--model", "m.model", "--data", "empty.glyphs"],
    );
    assert!(stderr.contains("empty dataset"), "{stderr}");
}

#[test]
fn predict_rejects_mismatched_dims() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &["gen-glyphs", "--out", "abc.glyphs", "--classes", "3"],
    );
    pairnet_ok(
        dir,
        &["build-metric", "--data", "abc.glyphs", "--out", "m.model"],
    );
    fs::write(dir.join("small.glyphs"), "label 0\n##\n.#\n").unwrap();
    let stderr = pairnet_err(
        dir,
        &["predict", "--model", "m.model", "--input", "small.glyphs"],
    );
    assert!(stderr.contains("dimension mismatch"), "{stderr}");
}

#[test]
fn metric_growth_rejects_forged_unit_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pairnet_ok(
        dir,
        &["gen-glyphs", "--out", "abc.glyphs", "--classes", "3"],
    );
    pairnet_ok(
        dir,
        &["build-metric", "--data", "abc.glyphs", "--out", "m.model"],
    );
    // restate the wrong letters (B, C, D instead of A, B, C) plus a new one
    let wrong = pairnet_core::glyph_dataset(5, 1, 0, 0).unwrap();
    let shifted = pairnet_core::grid::Dataset::new(
        4,
        wrong.dims,
        wrong
            .items
            .into_iter()
            .skip(1)
            .enumerate()
            .map(|(i, mut it)| {
                it.label = i.min(3);
                it
            })
            .collect(),
    );
    pairnet_core::io::glyph_text::save_glyphs(&shifted, dir.join("forged.glyphs")).unwrap();
    let stderr = pairnet_err(
        dir,
        &[
            "add-class",
            "--model",
            "m.model",
            "--data",
            "forged.glyphs",
            "--out",
            "x.model",
        ],
    );
    assert!(stderr.contains("do not reproduce block"), "{stderr}");
}
