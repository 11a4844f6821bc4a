//! Command-line front end: argument grammar, command implementations, and
//! the deterministic per-block seed fan-out.

pub mod args;
pub mod commands;
pub mod seed;
