//! Training behavior: convergence on separable data, determinism, purity,
//! and loss accounting.

use pairnet_core::block::{batch_loss, init_block, params_vec, train_block, KindSpec, TrainConfig};
use pairnet_core::grid::{Dims, ImageGrid};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const DIMS: Dims = Dims { cols: 3, rows: 3 };

fn random_grid(rng: &mut ChaCha8Rng) -> ImageGrid {
    let mask: u32 = rng.random_range(0..512);
    ImageGrid::from_fn(DIMS, |c, r| mask >> (r * 3 + c) & 1 == 1).unwrap()
}

/// Builds a dataset that is linearly separable by construction: labels come
/// from a hidden integer weight vector, and zero-margin points are
/// discarded. With integer weights in [-2, 2] and a bias in [-2, 2] the
/// perceptron mistake bound is (9 + 1) * (9 * 4 + 4) / 1 = 400, so 900
/// epochs always suffice.
fn separable_dataset(seed: u64) -> (Vec<ImageGrid>, Vec<ImageGrid>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<i32> = (0..9).map(|_| rng.random_range(-2..=2)).collect();
    let bias: i32 = rng.random_range(-2..=2);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    while pos.is_empty() || neg.is_empty() || pos.len() + neg.len() < 10 {
        let g = random_grid(&mut rng);
        let score: i32 = g
            .active_cells()
            .iter()
            .map(|&(c, r)| hidden[r * 3 + c])
            .sum::<i32>()
            + bias;
        match score.cmp(&0) {
            std::cmp::Ordering::Greater => pos.push(g),
            std::cmp::Ordering::Less => neg.push(g),
            std::cmp::Ordering::Equal => {}
        }
    }
    (pos, neg)
}

#[test]
fn perceptron_converges_on_certified_separable_data() {
    for seed in 0..10u64 {
        let (pos, neg) = separable_dataset(seed);
        let pos_refs: Vec<&ImageGrid> = pos.iter().collect();
        let neg_refs: Vec<&ImageGrid> = neg.iter().collect();
        let mut cfg = TrainConfig::perceptron();
        cfg.max_epochs = 900;
        cfg.init_seed = seed;
        cfg.shuffle_seed = seed.wrapping_add(1);
        let block = init_block((0, 1), KindSpec::Perceptron, DIMS, seed, 0.1).unwrap();
        let (trained, report) = train_block(&block, &pos_refs, &neg_refs, &cfg).unwrap();
        assert!(
            report.converged,
            "seed {seed}: {} errors after {} epochs",
            report.final_train_errors, report.epochs_run
        );
        assert_eq!(report.final_train_errors, 0);
        // the returned parameters really do separate the data
        for g in &pos_refs {
            assert!(pairnet_core::block::block_bit(&trained, g).unwrap());
        }
        for g in &neg_refs {
            assert!(!pairnet_core::block::block_bit(&trained, g).unwrap());
        }
    }
}

#[test]
fn training_is_deterministic_and_pure() {
    let (pos, neg) = separable_dataset(42);
    let pos_refs: Vec<&ImageGrid> = pos.iter().collect();
    let neg_refs: Vec<&ImageGrid> = neg.iter().collect();
    for kind in [
        KindSpec::Perceptron,
        KindSpec::SigmoidNet { hidden_size: 4 },
    ] {
        let cfg = match kind {
            KindSpec::Perceptron => TrainConfig::perceptron(),
            KindSpec::SigmoidNet { .. } => TrainConfig::gradient_descent(),
        };
        let block = init_block((0, 1), kind, DIMS, 7, 0.1).unwrap();
        let before = params_vec(&block).unwrap();
        let (a, ra) = train_block(&block, &pos_refs, &neg_refs, &cfg).unwrap();
        let (b, rb) = train_block(&block, &pos_refs, &neg_refs, &cfg).unwrap();
        // pure: the input block is untouched
        assert_eq!(params_vec(&block).unwrap(), before);
        // deterministic: bit-identical runs
        let pa = params_vec(&a).unwrap();
        let pb = params_vec(&b).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(ra.epochs_run, rb.epochs_run);
        assert_eq!(ra.final_train_errors, rb.final_train_errors);
    }
}

#[test]
fn gradient_descent_reduces_the_recorded_loss() {
    let (pos, neg) = separable_dataset(3);
    let pos_refs: Vec<&ImageGrid> = pos.iter().collect();
    let neg_refs: Vec<&ImageGrid> = neg.iter().collect();
    let mut cfg = TrainConfig::gradient_descent();
    cfg.max_epochs = 200;
    let block = init_block(
        (0, 1),
        KindSpec::SigmoidNet { hidden_size: 4 },
        DIMS,
        11,
        0.1,
    )
    .unwrap();
    let initial = batch_loss(&block, &pos_refs, &neg_refs).unwrap();
    let (trained, report) = train_block(&block, &pos_refs, &neg_refs, &cfg).unwrap();
    let trace = &report.loss_trace;
    assert_eq!(trace.len(), report.epochs_run);
    assert!(
        trace.last().unwrap() < &initial,
        "loss went {initial} -> {}",
        trace.last().unwrap()
    );
    // the last trace entry is the loss of the returned parameters
    let final_loss = batch_loss(&trained, &pos_refs, &neg_refs).unwrap();
    assert_eq!(final_loss.to_bits(), trace.last().unwrap().to_bits());
}
