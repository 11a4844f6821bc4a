//! On-disk formats: glyph text datasets, IDX binary datasets, and JSON
//! model files with exact hexadecimal float parameters.

pub mod glyph_text;
pub mod hexfloat;
pub mod idx;
pub mod model;
