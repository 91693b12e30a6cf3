//! Dependency-free image output: a diverging colormap, binary PPM filter
//! grids and a minimal SVG writer.

pub mod colormap;
pub mod plot;
pub mod ppm;
pub mod svg;

pub use colormap::{diverging, sequential, Rgb};
pub use ppm::{filter_grid, GridLayout};
pub use svg::Svg;
