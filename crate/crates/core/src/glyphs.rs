//! Built-in 5x7 letter glyphs and a deterministic noisy-dataset generator,
//! used as fixtures by the tests and by the glyph-generation command.

use crate::error::{Error, Result};
use crate::grid::{Dataset, Dims, ImageGrid, LabeledImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Glyph width in cells.
pub const GLYPH_COLS: usize = 5;
/// Glyph height in cells.
pub const GLYPH_ROWS: usize = 7;
/// Number of letters in the font.
pub const LETTER_COUNT: usize = 26;

const FONT: [[&str; GLYPH_ROWS]; LETTER_COUNT] = [
    [
        ".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#",
    ], // A
    [
        "####.", "#...#", "#...#", "####.", "#...#", "#...#", "####.",
    ], // B
    [
        ".###.", "#...#", "#....", "#....", "#....", "#...#", ".###.",
    ], // C
    [
        "####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####.",
    ], // D
    [
        "#####", "#....", "#....", "####.", "#....", "#....", "#####",
    ], // E
    [
        "#####", "#....", "#....", "####.", "#....", "#....", "#....",
    ], // F
    [
        ".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".###.",
    ], // G
    [
        "#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#",
    ], // H
    [
        ".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.",
    ], // I
    [
        "..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##..",
    ], // J
    [
        "#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#",
    ], // K
    [
        "#....", "#....", "#....", "#....", "#....", "#....", "#####",
    ], // L
    [
        "#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#",
    ], // M
    [
        "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#",
    ], // N
    [
        ".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.",
    ], // O
    [
        "####.", "#...#", "#...#", "####.", "#....", "#....", "#....",
    ], // P
    [
        ".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#",
    ], // Q
    [
        "####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#",
    ], // R
    [
        ".####", "#....", "#....", ".###.", "....#", "....#", "####.",
    ], // S
    [
        "#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..",
    ], // T
    [
        "#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###.",
    ], // U
    [
        "#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#..",
    ], // V
    [
        "#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#",
    ], // W
    [
        "#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#",
    ], // X
    [
        "#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#..",
    ], // Y
    [
        "#####", "....#", "...#.", "..#..", ".#...", "#....", "#####",
    ], // Z
];

/// The clean 5x7 glyph for letter index `letter` (0 = A .. 25 = Z).
pub fn letter_glyph(letter: usize) -> Result<ImageGrid> {
    if letter >= LETTER_COUNT {
        return Err(Error::Config(format!(
            "letter index {letter} out of range 0..{LETTER_COUNT}"
        )));
    }
    ImageGrid::from_text(&FONT[letter].join("\n"))
}

/// Copy of `grid` with exactly `flips` distinct uniformly chosen cells
/// inverted. `flips` must leave at least one cell untouched.
pub fn noisy_copy(grid: &ImageGrid, flips: usize, rng: &mut ChaCha8Rng) -> Result<ImageGrid> {
    let cells = grid.dims().cell_count();
    if flips >= cells {
        return Err(Error::Config(format!(
            "{flips} flips would invert every cell of a {} grid",
            grid.dims()
        )));
    }
    let mut out = grid.clone();
    for idx in rand::seq::index::sample(rng, cells, flips) {
        let c = idx % grid.dims().cols;
        let r = idx / grid.dims().cols;
        out = out.with_flipped(c, r);
    }
    Ok(out)
}

/// Deterministic labeled glyph dataset: `samples_per_class` noisy copies of
/// each of the first `classes` letters, in class-major order. With
/// `noise = 0` every copy is the clean glyph.
pub fn glyph_dataset(
    classes: usize,
    samples_per_class: usize,
    noise: usize,
    seed: u64,
) -> Result<Dataset> {
    if !(2..=LETTER_COUNT).contains(&classes) {
        return Err(Error::Config(format!(
            "classes must be in 2..={LETTER_COUNT}, got {classes}"
        )));
    }
    if samples_per_class == 0 {
        return Err(Error::Config("samples_per_class must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(classes * samples_per_class);
    for label in 0..classes {
        let clean = letter_glyph(label)?;
        for _ in 0..samples_per_class {
            let grid = if noise == 0 {
                clean.clone()
            } else {
                noisy_copy(&clean, noise, &mut rng)?
            };
            items.push(LabeledImage { grid, label });
        }
    }
    Ok(Dataset::new(
        classes,
        Dims::new(GLYPH_COLS, GLYPH_ROWS),
        items,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::validate_dataset;

    #[test]
    fn every_letter_is_well_formed_and_distinct() {
        let mut seen = Vec::new();
        for letter in 0..LETTER_COUNT {
            let g = letter_glyph(letter).unwrap();
            assert_eq!(g.dims(), Dims::new(GLYPH_COLS, GLYPH_ROWS));
            assert!(g.count_active() > 0, "letter {letter} is blank");
            assert!(!seen.contains(&g), "letter {letter} duplicates another");
            seen.push(g);
        }
        assert!(letter_glyph(26).is_err());
    }

    #[test]
    fn noisy_copy_flips_exactly_n_cells() {
        let clean = letter_glyph(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for flips in [0, 1, 2, 5, 34] {
            let noisy = noisy_copy(&clean, flips, &mut rng).unwrap();
            let differing = clean
                .cells()
                .iter()
                .zip(noisy.cells())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(differing, flips);
        }
        assert!(noisy_copy(&clean, 35, &mut rng).is_err());
    }

    #[test]
    fn dataset_is_deterministic_and_valid() {
        let a = glyph_dataset(3, 4, 2, 9).unwrap();
        let b = glyph_dataset(3, 4, 2, 9).unwrap();
        assert_eq!(a, b);
        let c = glyph_dataset(3, 4, 2, 10).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.items.len(), 12);
        assert!(validate_dataset(&a).is_clean());
        for (i, item) in a.items.iter().enumerate() {
            assert_eq!(item.label, i / 4);
        }
    }

    #[test]
    fn zero_noise_reproduces_clean_glyphs() {
        let ds = glyph_dataset(3, 2, 0, 0).unwrap();
        for item in &ds.items {
            assert_eq!(item.grid, letter_glyph(item.label).unwrap());
        }
    }

    #[test]
    fn class_range_is_enforced() {
        assert!(glyph_dataset(1, 1, 0, 0).is_err());
        assert!(glyph_dataset(27, 1, 0, 0).is_err());
        assert!(glyph_dataset(26, 1, 0, 0).is_ok());
    }
}
