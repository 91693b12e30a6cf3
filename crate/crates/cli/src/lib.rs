//! Command-line front end for filterscope: argument parsing, the
//! subcommands, and dependency-free SVG/PPM rendering.

pub mod args;
pub mod commands;
pub mod kde;
pub mod output;
pub mod render;

pub use commands::run;
