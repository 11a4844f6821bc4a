//! Binary image grids and labeled datasets — the input vocabulary shared by
//! every other module.
//!
//! A grid cell is addressed as `(c, r)` = (column, row) and stored row-major,
//! so `(0, 0)` is the top-left cell and the cell after `(C-1, 0)` is `(0, 1)`.

use crate::error::{Error, Result};
use std::fmt;

/// Class label. Labels in a dataset with `class_count = K` range over `0..K`.
pub type ClassId = usize;

/// Grid dimensions: `cols` columns by `rows` rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub cols: usize,
    pub rows: usize,
}

impl Dims {
    pub fn new(cols: usize, rows: usize) -> Dims {
        Dims { cols, rows }
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn contains(&self, c: usize, r: usize) -> bool {
        c < self.cols && r < self.rows
    }

    fn validate(&self) -> Result<()> {
        if self.cols == 0 || self.rows == 0 {
            return Err(Error::EmptyGrid);
        }
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cols, self.rows)
    }
}

/// A binary image: every cell is either active (`true`) or inactive.
///
/// Immutable after construction; "mutating" helpers return a new grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImageGrid {
    dims: Dims,
    cells: Vec<bool>,
}

impl ImageGrid {
    /// Builds a grid from a row-major cell buffer.
    pub fn new(dims: Dims, cells: Vec<bool>) -> Result<ImageGrid> {
        dims.validate()?;
        if cells.len() != dims.cell_count() {
            return Err(Error::CellCount {
                dims,
                len: cells.len(),
            });
        }
        Ok(ImageGrid { dims, cells })
    }

    /// All-inactive grid.
    pub fn blank(dims: Dims) -> Result<ImageGrid> {
        dims.validate()?;
        Ok(ImageGrid {
            dims,
            cells: vec![false; dims.cell_count()],
        })
    }

    /// Builds a grid by evaluating `f(c, r)` for every cell.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Result<ImageGrid> {
        dims.validate()?;
        let mut cells = Vec::with_capacity(dims.cell_count());
        for r in 0..dims.rows {
            for c in 0..dims.cols {
                cells.push(f(c, r));
            }
        }
        Ok(ImageGrid { dims, cells })
    }

    /// Builds a grid with exactly the listed cells active.
    pub fn from_active_cells(dims: Dims, active: &[(usize, usize)]) -> Result<ImageGrid> {
        let mut grid = ImageGrid::blank(dims)?;
        for &(c, r) in active {
            if !dims.contains(c, r) {
                return Err(Error::Config(format!(
                    "active cell ({c}, {r}) outside {dims}"
                )));
            }
            grid.cells[r * dims.cols + c] = true;
        }
        Ok(grid)
    }

    /// Parses a grid from lines of `'#'` (active) and `'.'` (inactive).
    ///
    /// ```
    /// use pairnet_core::grid::ImageGrid;
    /// let g = ImageGrid::from_text("#.\n.#").unwrap();
    /// assert_eq!(g.active_cells(), vec![(0, 0), (1, 1)]);
    /// ```
    pub fn from_text(text: &str) -> Result<ImageGrid> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let cols = lines[0].chars().count();
        let dims = Dims::new(cols, lines.len());
        dims.validate()?;
        let mut cells = Vec::with_capacity(dims.cell_count());
        for line in &lines {
            if line.chars().count() != cols {
                return Err(Error::Config(format!(
                    "ragged row: expected {cols} characters, got {}",
                    line.chars().count()
                )));
            }
            for ch in line.chars() {
                match ch {
                    '#' => cells.push(true),
                    '.' => cells.push(false),
                    other => return Err(Error::Config(format!("unexpected character {other:?}"))),
                }
            }
        }
        Ok(ImageGrid { dims, cells })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn cols(&self) -> usize {
        self.dims.cols
    }

    pub fn rows(&self) -> usize {
        self.dims.rows
    }

    /// Cell value at `(c, r)`. Panics if out of bounds.
    pub fn get(&self, c: usize, r: usize) -> bool {
        assert!(
            self.dims.contains(c, r),
            "cell ({c}, {r}) outside {}",
            self.dims
        );
        self.cells[r * self.dims.cols + c]
    }

    /// Row-major cell buffer.
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Coordinates of all active cells, in row-major order.
    pub fn active_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.dims.rows {
            for c in 0..self.dims.cols {
                if self.cells[r * self.dims.cols + c] {
                    out.push((c, r));
                }
            }
        }
        out
    }

    /// Number of active cells.
    pub fn count_active(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Copy of this grid with one cell inverted.
    pub fn with_flipped(&self, c: usize, r: usize) -> ImageGrid {
        assert!(
            self.dims.contains(c, r),
            "cell ({c}, {r}) outside {}",
            self.dims
        );
        let mut out = self.clone();
        out.cells[r * self.dims.cols + c] = !out.cells[r * self.dims.cols + c];
        out
    }
}

impl fmt::Display for ImageGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dims.rows {
            for c in 0..self.dims.cols {
                write!(f, "{}", if self.get(c, r) { '#' } else { '.' })?;
            }
            if r + 1 < self.dims.rows {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// A grayscale image with values in `[0, 1]`, awaiting binarization.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayGrid {
    dims: Dims,
    values: Vec<f64>,
}

impl GrayGrid {
    pub fn new(dims: Dims, values: Vec<f64>) -> Result<GrayGrid> {
        dims.validate()?;
        if values.len() != dims.cell_count() {
            return Err(Error::CellCount {
                dims,
                len: values.len(),
            });
        }
        Ok(GrayGrid { dims, values })
    }

    /// Builds a grid from nested rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<GrayGrid> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyGrid);
        }
        let cols = rows[0].len();
        let dims = Dims::new(cols, rows.len());
        let mut values = Vec::with_capacity(dims.cell_count());
        for row in rows {
            if row.len() != cols {
                return Err(Error::CellCount {
                    dims,
                    len: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Ok(GrayGrid { dims, values })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn get(&self, c: usize, r: usize) -> f64 {
        assert!(
            self.dims.contains(c, r),
            "cell ({c}, {r}) outside {}",
            self.dims
        );
        self.values[r * self.dims.cols + c]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Thresholds a grayscale grid into a binary one.
///
/// A cell becomes active iff its value is strictly greater than `threshold`,
/// so `threshold = 1.0` always yields an all-inactive grid.
pub fn binarize_grid(gray: &GrayGrid, threshold: f64) -> Result<ImageGrid> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!(
            "binarize threshold {threshold} outside [0, 1]"
        )));
    }
    ImageGrid::new(
        gray.dims,
        gray.values.iter().map(|&v| v > threshold).collect(),
    )
}

/// A binary image together with its class label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledImage {
    pub grid: ImageGrid,
    pub label: ClassId,
}

/// A labeled collection of binary images declaring `class_count` classes and
/// common dimensions `dims`.
///
/// Construction is deliberately lenient; [`validate_dataset`] reports
/// violations instead of rejecting them, so that inspection tools can load
/// inconsistent data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub class_count: usize,
    pub dims: Dims,
    pub items: Vec<LabeledImage>,
}

impl Dataset {
    pub fn new(class_count: usize, dims: Dims, items: Vec<LabeledImage>) -> Dataset {
        Dataset {
            class_count,
            dims,
            items,
        }
    }

    /// Grids of all items carrying `label`.
    pub fn grids_with_label(&self, label: ClassId) -> Vec<&ImageGrid> {
        self.items
            .iter()
            .filter(|it| it.label == label)
            .map(|it| &it.grid)
            .collect()
    }
}

/// A labeled collection of grayscale images, as produced by the IDX loader.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayDataset {
    pub class_count: usize,
    pub dims: Dims,
    pub items: Vec<(GrayGrid, ClassId)>,
}

impl GrayDataset {
    /// Binarizes every item with one threshold.
    pub fn binarize(&self, threshold: f64) -> Result<Dataset> {
        let mut items = Vec::with_capacity(self.items.len());
        for (gray, label) in &self.items {
            items.push(LabeledImage {
                grid: binarize_grid(gray, threshold)?,
                label: *label,
            });
        }
        Ok(Dataset::new(self.class_count, self.dims, items))
    }
}

/// One dataset defect found by [`validate_dataset`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationIssue {
    /// Item `index` does not share the dataset's dimensions.
    DimensionMismatch {
        index: usize,
        expected: Dims,
        actual: Dims,
    },
    /// No item carries `label` even though it is below `class_count`.
    MissingLabel { label: ClassId },
    /// Item `index` carries a label at or above `class_count`.
    LabelOutOfRange { index: usize, label: ClassId },
    /// Item `index` has no active cells. Legal as an input, degenerate as a
    /// sample; flagged, not fatal.
    AllZeroImage { index: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DimensionMismatch {
                index,
                expected,
                actual,
            } => write!(
                f,
                "item {index}: dims {actual}, dataset declares {expected}"
            ),
            ValidationIssue::MissingLabel { label } => {
                write!(f, "class {label} has no examples")
            }
            ValidationIssue::LabelOutOfRange { index, label } => {
                write!(
                    f,
                    "item {index}: label {label} outside declared class range"
                )
            }
            ValidationIssue::AllZeroImage { index } => {
                write!(f, "item {index}: no active cells")
            }
        }
    }
}

/// Result of [`validate_dataset`]: an issue list, empty when consistent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    /// True if the only issues are all-zero images.
    pub fn only_degenerate(&self) -> bool {
        self.issues
            .iter()
            .all(|i| matches!(i, ValidationIssue::AllZeroImage { .. }))
    }
}

/// Checks a dataset against its declared dimensions and class range.
///
/// Report-only: never mutates or rejects.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen = vec![false; ds.class_count];
    for (index, item) in ds.items.iter().enumerate() {
        if item.grid.dims() != ds.dims {
            issues.push(ValidationIssue::DimensionMismatch {
                index,
                expected: ds.dims,
                actual: item.grid.dims(),
            });
        }
        if item.label < ds.class_count {
            seen[item.label] = true;
        } else {
            issues.push(ValidationIssue::LabelOutOfRange {
                index,
                label: item.label,
            });
        }
        if item.grid.count_active() == 0 {
            issues.push(ValidationIssue::AllZeroImage { index });
        }
    }
    for (label, seen) in seen.iter().enumerate() {
        if !seen {
            issues.push(ValidationIssue::MissingLabel { label });
        }
    }
    ValidationReport { issues }
}
