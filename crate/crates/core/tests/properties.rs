//! Randomized structural properties of the metric layer, the grid types,
//! and the float codec. Everything here is exact; there are no tolerances.

use pairnet_core::grid::{binarize_grid, Dims, GrayGrid, ImageGrid};
use pairnet_core::io::hexfloat::{from_hex, to_hex};
use pairnet_core::metric::{build_pair_weights, distance_field, sample_score, weighted_sum};
use proptest::prelude::*;

/// A nonempty binary grid together with its dims, drawn cell by cell with
/// at least one active cell forced.
fn grid_strategy(max_side: usize) -> impl Strategy<Value = ImageGrid> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(cols, rows)| {
            let n = cols * rows;
            (
                Just(Dims::new(cols, rows)),
                proptest::collection::vec(any::<bool>(), n),
                0..n,
            )
        })
        .prop_map(|(dims, mut cells, forced)| {
            cells[forced] = true;
            ImageGrid::from_fn(dims, |c, r| cells[r * dims.cols + c]).unwrap()
        })
}

/// An arbitrary binary grid of the given dims, empty allowed.
fn input_strategy(dims: Dims) -> impl Strategy<Value = ImageGrid> {
    proptest::collection::vec(any::<bool>(), dims.cell_count())
        .prop_map(move |cells| ImageGrid::from_fn(dims, |c, r| cells[r * dims.cols + c]).unwrap())
}

proptest! {
    #[test]
    fn pair_weights_are_antisymmetric(
        (a, b) in grid_strategy(16).prop_flat_map(|a| {
            let dims = a.dims();
            (Just(a), input_strategy(dims).prop_filter("nonempty", |g| g.count_active() > 0))
        })
    ) {
        let fa = distance_field(&a).unwrap();
        let fb = distance_field(&b).unwrap();
        let ab = build_pair_weights(&fa, &fb).unwrap();
        let ba = build_pair_weights(&fb, &fa).unwrap();
        let negated = ab.negated();
        prop_assert_eq!(negated.values(), ba.values());
    }

    #[test]
    fn weighted_sum_decomposes_into_score_difference(
        (a, b, x) in grid_strategy(12).prop_flat_map(|a| {
            let dims = a.dims();
            (
                Just(a),
                input_strategy(dims).prop_filter("nonempty", |g| g.count_active() > 0),
                input_strategy(dims),
            )
        })
    ) {
        let fa = distance_field(&a).unwrap();
        let fb = distance_field(&b).unwrap();
        let w = build_pair_weights(&fa, &fb).unwrap();
        let sn = weighted_sum(&w, &x).unwrap();
        let sa = sample_score(&fa, &x).unwrap();
        let sb = sample_score(&fb, &x).unwrap();
        prop_assert_eq!(sn, sa - sb);
    }

    #[test]
    fn distance_field_is_the_minimum_over_active_cells(sample in grid_strategy(10)) {
        let field = distance_field(&sample).unwrap();
        let active = sample.active_cells();
        let dims = sample.dims();
        for r in 0..dims.rows {
            for c in 0..dims.cols {
                let expect = active
                    .iter()
                    .map(|&(ac, ar)| {
                        let dc = ac as i64 - c as i64;
                        let dr = ar as i64 - r as i64;
                        dc * dc + dr * dr
                    })
                    .min()
                    .unwrap();
                prop_assert_eq!(field.get(c, r), expect);
                prop_assert_eq!(field.get(c, r) == 0, sample.get(c, r));
            }
        }
    }

    #[test]
    fn active_cells_rebuild_the_grid(g in grid_strategy(10)) {
        let rebuilt = ImageGrid::from_active_cells(g.dims(), &g.active_cells()).unwrap();
        prop_assert_eq!(rebuilt, g);
    }

    #[test]
    fn grid_text_display_reparses(g in grid_strategy(10)) {
        let text = g.to_string();
        let back = ImageGrid::from_text(&text).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn hexfloat_round_trips_every_finite_bit_pattern(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let text = to_hex(v).unwrap();
        let back = from_hex(&text).unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn binarize_is_strictly_greater_than(
        (values, threshold) in (
            proptest::collection::vec(0.0f64..=1.0, 6),
            0.0f64..=1.0,
        )
    ) {
        let gray = GrayGrid::new(Dims::new(3, 2), values.clone()).unwrap();
        let bin = binarize_grid(&gray, threshold).unwrap();
        for r in 0..2 {
            for c in 0..3 {
                prop_assert_eq!(bin.get(c, r), values[r * 3 + c] > threshold);
            }
        }
    }
}
