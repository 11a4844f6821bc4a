//! Incremental class addition: counts follow the closed forms, old
//! parameters never move, and growing one unit at a time from N=2 lands on
//! exactly the network that direct construction produces.

use pairnet_core::block::PairBlock;
use pairnet_core::ensemble::PairKey;
use pairnet_core::ensemble::{
    expected_block_count, growth_delta, metric_ensemble, required_pairs, TopologyVariant,
};
use pairnet_core::grid::{Dims, ImageGrid, LabeledImage};
use pairnet_core::io::model::block_param_bytes;
use pairnet_core::metric::pair_weights_from_samples;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const DIMS: Dims = Dims { cols: 4, rows: 4 };

fn random_sample(rng: &mut ChaCha8Rng) -> ImageGrid {
    let mask = rng.random_range(1u32..1 << 16);
    ImageGrid::from_fn(DIMS, |c, r| mask >> (r * 4 + c) & 1 == 1).unwrap()
}

#[test]
fn count_formulas_and_telescoping_hold_to_n_50() {
    for n in 2..=50usize {
        let full = expected_block_count(n, TopologyVariant::Full).unwrap();
        let half = expected_block_count(n, TopologyVariant::Compressed).unwrap();
        assert_eq!(full, (n - 1) * n);
        assert_eq!(half, n * (n - 1) / 2);
        assert_eq!(full, 2 * half);
        assert_eq!(required_pairs(n, TopologyVariant::Full).len(), full);
        assert_eq!(required_pairs(n, TopologyVariant::Compressed).len(), half);
        if n > 2 {
            // adding the n-th unit costs exactly the difference of counts
            let prev_full = expected_block_count(n - 1, TopologyVariant::Full).unwrap();
            let prev_half = expected_block_count(n - 1, TopologyVariant::Compressed).unwrap();
            assert_eq!(
                growth_delta(n - 1, TopologyVariant::Full).unwrap(),
                full - prev_full
            );
            assert_eq!(
                growth_delta(n - 1, TopologyVariant::Compressed).unwrap(),
                half - prev_half
            );
        }
    }
}

#[test]
fn growing_one_unit_at_a_time_reaches_the_direct_build() {
    for variant in [TopologyVariant::Full, TopologyVariant::Compressed] {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let samples: Vec<LabeledImage> = (0..8)
            .map(|label| LabeledImage {
                grid: random_sample(&mut rng),
                label,
            })
            .collect();

        let mut net = metric_ensemble(&samples[..2], variant).unwrap();
        for n in 2..8usize {
            let frozen: Vec<Vec<u8>> = net
                .blocks()
                .values()
                .map(|b| block_param_bytes(b).unwrap())
                .collect();
            let keys: Vec<_> = net.blocks().keys().copied().collect();

            // metric growth: one block against each existing unit
            let mut new_blocks: BTreeMap<PairKey, PairBlock> = BTreeMap::new();
            for i in 0..n {
                let w = pair_weights_from_samples(&samples[i].grid, &samples[n].grid).unwrap();
                if variant == TopologyVariant::Full {
                    new_blocks.insert((n, i), PairBlock::metric((n, i), w.negated()).unwrap());
                }
                new_blocks.insert((i, n), PairBlock::metric((i, n), w).unwrap());
            }
            assert_eq!(new_blocks.len(), growth_delta(n, variant).unwrap());
            let grown = net.add_class(new_blocks, n).unwrap();

            assert_eq!(grown.unit_count(), n + 1);
            assert_eq!(grown.unit_threshold(), n);
            assert_eq!(grown.class_count(), n + 1);
            assert_eq!(
                grown.blocks().len(),
                expected_block_count(n + 1, variant).unwrap()
            );
            // every old block is byte-identical in the grown network
            for (key, bytes) in keys.iter().zip(&frozen) {
                assert_eq!(
                    &block_param_bytes(&grown.blocks()[key]).unwrap(),
                    bytes,
                    "block {key:?} changed during growth"
                );
            }
            net = grown;
        }

        let direct = metric_ensemble(&samples, variant).unwrap();
        assert_eq!(net, direct);
    }
}

#[test]
fn growth_can_extend_an_existing_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<LabeledImage> = (0..3)
        .map(|label| LabeledImage {
            grid: random_sample(&mut rng),
            label,
        })
        .collect();
    let net = metric_ensemble(&samples, TopologyVariant::Compressed).unwrap();
    let extra = random_sample(&mut rng);
    let new_blocks: BTreeMap<PairKey, PairBlock> = (0..3)
        .map(|i| {
            let w = pair_weights_from_samples(&samples[i].grid, &extra).unwrap();
            ((i, 3), PairBlock::metric((i, 3), w).unwrap())
        })
        .collect();
    // the new unit joins class 1 instead of opening class 3
    let grown = net.add_class(new_blocks, 1).unwrap();
    assert_eq!(grown.unit_count(), 4);
    assert_eq!(grown.class_count(), 3);
    assert_eq!(grown.class_of_unit(3), 1);
    assert_eq!(grown.class_groups()[&1], [1usize, 3].into_iter().collect());
}
