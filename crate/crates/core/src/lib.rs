//! Extraction and statistical analysis of 3×3 convolution filters.
//!
//! Filters are pulled out of ONNX models ([`ingest`]), persisted in a flat
//! binary store ([`store`]), decomposed by PCA ([`spectra`]), screened for
//! degenerated layers ([`degeneracy`]) and compared across model groups by
//! their coefficient distributions ([`shift`]).
//!
//! Filter containers are generic over the element type (see [`Scalar`]);
//! statistics are always accumulated in `f64`.

pub mod degeneracy;
pub mod ingest;
pub mod matrix;
pub mod scalar;
pub mod shift;
pub mod spectra;
pub mod store;

pub use matrix::{Filter, FilterMatrix, FilterSet, IndexView, FILTER_LEN};
pub use scalar::Scalar;
pub use spectra::{CoefficientSet, PcaBasis};
pub use store::FilterStore;

/// Single-precision filters, the storage format of extracted weights.
pub type FilterMatrix32 = FilterMatrix<f32>;
pub type FilterMatrix64 = FilterMatrix<f64>;
pub type CoefficientSet32 = CoefficientSet<f32>;
pub type CoefficientSet64 = CoefficientSet<f64>;
