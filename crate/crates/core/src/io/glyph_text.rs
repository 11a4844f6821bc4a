//! Plain-text glyph datasets.
//!
//! A file is a sequence of records separated by blank lines. Each record is
//! a `label <id>` line followed by the grid rows, one character per cell,
//! `#` active and `.` inactive. All records must share one grid size.

use crate::error::{Error, Result};
use crate::grid::{Dataset, Dims, ImageGrid, LabeledImage};
use std::fs;
use std::path::Path;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::GlyphParse {
        line,
        msg: msg.into(),
    }
}

/// Parses glyph text into a dataset. The declared class count is the
/// largest label plus one; gaps are left for [`crate::grid::validate_dataset`]
/// to report.
pub fn parse_glyphs(text: &str) -> Result<Dataset> {
    let lines: Vec<&str> = text.lines().collect();
    let mut items: Vec<LabeledImage> = Vec::new();
    let mut dims: Option<Dims> = None;
    let mut cursor = 0;

    while cursor < lines.len() {
        if lines[cursor].trim().is_empty() {
            cursor += 1;
            continue;
        }
        let header_line = cursor + 1; // 1-based for messages
        let mut words = lines[cursor].split_whitespace();
        match (words.next(), words.next(), words.next()) {
            (Some("label"), Some(id), None) => {
                let label: usize = id
                    .parse()
                    .map_err(|_| parse_err(header_line, format!("bad label {id:?}")))?;
                cursor += 1;

                let mut rows: Vec<&str> = Vec::new();
                while cursor < lines.len() && !lines[cursor].trim().is_empty() {
                    rows.push(lines[cursor]);
                    cursor += 1;
                }
                if rows.is_empty() {
                    return Err(parse_err(header_line, "record has no grid rows"));
                }
                let cols = rows[0].chars().count();
                let mut cells = Vec::with_capacity(cols * rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let row_line = header_line + 1 + i;
                    if row.chars().count() != cols {
                        return Err(parse_err(
                            row_line,
                            format!(
                                "ragged row: {} characters, record started with {cols}",
                                row.chars().count()
                            ),
                        ));
                    }
                    for ch in row.chars() {
                        match ch {
                            '#' => cells.push(true),
                            '.' => cells.push(false),
                            other => {
                                return Err(parse_err(
                                    row_line,
                                    format!("unexpected character {other:?}"),
                                ))
                            }
                        }
                    }
                }
                let record_dims = Dims::new(cols, rows.len());
                let grid = ImageGrid::new(record_dims, cells)
                    .map_err(|e| parse_err(header_line, e.to_string()))?;
                match dims {
                    None => dims = Some(record_dims),
                    Some(d) if d != record_dims => {
                        return Err(parse_err(
                            header_line + 1,
                            format!("record is {record_dims}, file started with {d}"),
                        ));
                    }
                    Some(_) => {}
                }
                items.push(LabeledImage { grid, label });
            }
            _ => {
                return Err(parse_err(
                    header_line,
                    format!("expected \"label <id>\", got {:?}", lines[cursor]),
                ))
            }
        }
    }

    let dims = dims.ok_or(Error::EmptyDataset)?;
    let class_count = items.iter().map(|it| it.label + 1).max().unwrap_or(0);
    Ok(Dataset::new(class_count, dims, items))
}

/// Renders a dataset in the glyph text format (inverse of [`parse_glyphs`]).
pub fn format_glyphs(ds: &Dataset) -> String {
    let mut out = String::new();
    for (i, item) in ds.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("label {}\n", item.label));
        out.push_str(&item.grid.to_string());
        out.push('\n');
    }
    out
}

/// Reads and parses a glyph file.
pub fn load_glyphs(path: impl AsRef<Path>) -> Result<Dataset> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| parse_err(1, "file is not valid UTF-8"))?;
    parse_glyphs(&text)
}

/// Writes a dataset as a glyph file.
pub fn save_glyphs(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_glyphs(ds))?;
    Ok(())
}
