//! Analytic first-layer construction: distance fields, pairwise weight grids
//! and the threshold rule for comparing an input against two stored samples.
//!
//! Everything here is exact integer arithmetic. A weight grid for the pair
//! (i, j) holds, per cell, the difference between the squared distance to
//! sample i's nearest active cell and the squared distance to sample j's.
//! Summing those weights over an input's active cells therefore compares
//! which sample the input is closer to, and the comparison fires on a
//! strictly negative sum ("closer to i").

use crate::error::{Error, Result};
use crate::grid::{Dims, ImageGrid};

/// Per-cell squared Euclidean distance to the nearest active cell of one
/// sample grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    dims: Dims,
    d2: Vec<i64>,
}

impl DistanceField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Squared distance at `(c, r)`. Panics if out of bounds.
    pub fn get(&self, c: usize, r: usize) -> i64 {
        assert!(
            self.dims.contains(c, r),
            "cell ({c}, {r}) outside {}",
            self.dims
        );
        self.d2[r * self.dims.cols + c]
    }

    /// Row-major squared-distance buffer.
    pub fn values(&self) -> &[i64] {
        &self.d2
    }
}

/// Per-cell signed weights generated from a pair of distance fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightGrid {
    dims: Dims,
    w: Vec<i64>,
}

impl WeightGrid {
    /// Builds a weight grid from a raw row-major buffer.
    pub fn new(dims: Dims, w: Vec<i64>) -> Result<WeightGrid> {
        if dims.cols == 0 || dims.rows == 0 {
            return Err(Error::EmptyGrid);
        }
        if w.len() != dims.cell_count() {
            return Err(Error::CellCount { dims, len: w.len() });
        }
        Ok(WeightGrid { dims, w })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Weight at `(c, r)`. Panics if out of bounds.
    pub fn get(&self, c: usize, r: usize) -> i64 {
        assert!(
            self.dims.contains(c, r),
            "cell ({c}, {r}) outside {}",
            self.dims
        );
        self.w[r * self.dims.cols + c]
    }

    /// Row-major weight buffer.
    pub fn values(&self) -> &[i64] {
        &self.w
    }

    /// Elementwise negation; swapping the generating pair produces this.
    pub fn negated(&self) -> WeightGrid {
        WeightGrid {
            dims: self.dims,
            w: self.w.iter().map(|&v| -v).collect(),
        }
    }
}

/// Computes the squared distance from every cell to the nearest active cell
/// of `sample`, by exhaustive scan over the active cells.
///
/// The scan is O(cells x active cells); grids here are small and a faster
/// transform would have to match this result bit-exactly anyway.
pub fn distance_field(sample: &ImageGrid) -> Result<DistanceField> {
    let active = sample.active_cells();
    if active.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let dims = sample.dims();
    let mut d2 = Vec::with_capacity(dims.cell_count());
    for r in 0..dims.rows {
        for c in 0..dims.cols {
            let mut best = i64::MAX;
            for &(ac, ar) in &active {
                let dc = ac as i64 - c as i64;
                let dr = ar as i64 - r as i64;
                let d = dc * dc + dr * dr;
                if d < best {
                    best = d;
                }
            }
            d2.push(best);
        }
    }
    Ok(DistanceField { dims, d2 })
}

/// Weight grid for the ordered pair (i, j): per cell, `d2_i - d2_j`.
///
/// A negative weight marks a cell nearer to sample i.
pub fn build_pair_weights(field_i: &DistanceField, field_j: &DistanceField) -> Result<WeightGrid> {
    if field_i.dims != field_j.dims {
        return Err(Error::DimensionMismatch {
            expected: field_i.dims,
            actual: field_j.dims,
        });
    }
    let w = field_i
        .d2
        .iter()
        .zip(&field_j.d2)
        .map(|(&a, &b)| a - b)
        .collect();
    Ok(WeightGrid {
        dims: field_i.dims,
        w,
    })
}

/// Convenience wrapper: weight grid straight from two sample grids.
pub fn pair_weights_from_samples(sample_i: &ImageGrid, sample_j: &ImageGrid) -> Result<WeightGrid> {
    if sample_i.dims() != sample_j.dims() {
        return Err(Error::DimensionMismatch {
            expected: sample_i.dims(),
            actual: sample_j.dims(),
        });
    }
    build_pair_weights(&distance_field(sample_i)?, &distance_field(sample_j)?)
}

/// Sum of weights over the input's active cells. Exact integers; an all-zero
/// input sums to 0.
pub fn weighted_sum(weights: &WeightGrid, input: &ImageGrid) -> Result<i64> {
    if weights.dims != input.dims() {
        return Err(Error::DimensionMismatch {
            expected: weights.dims,
            actual: input.dims(),
        });
    }
    Ok(weights
        .w
        .iter()
        .zip(input.cells())
        .filter(|(_, &x)| x)
        .map(|(&w, _)| w)
        .sum())
}

/// Comparison bit: fires (true) only on a strictly negative sum.
///
/// A sum of 0 means the input is equidistant from both samples; that is not
/// a win, so ties fire neither side of a pair.
pub fn threshold_fire(sn: i64) -> bool {
    sn < 0
}

/// Sum of one sample's squared distances over the input's active cells.
///
/// Decomposition identity, exact in integers:
/// `weighted_sum(build_pair_weights(f_i, f_j), x) ==
///  sample_score(f_i, x) - sample_score(f_j, x)`.
pub fn sample_score(field_k: &DistanceField, input: &ImageGrid) -> Result<i64> {
    if field_k.dims != input.dims() {
        return Err(Error::DimensionMismatch {
            expected: field_k.dims,
            actual: input.dims(),
        });
    }
    Ok(field_k
        .d2
        .iter()
        .zip(input.cells())
        .filter(|(_, &x)| x)
        .map(|(&d, _)| d)
        .sum())
}
