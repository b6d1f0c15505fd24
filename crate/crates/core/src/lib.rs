//! Variational fusion of registered infrared and visible images.
//!
//! The fused plane is found by minimizing a composite loss directly over its
//! pixels: an L1 intensity term against a synthesized reference (edge-boosted
//! maximum image blended with its histogram-equalized version) plus a
//! gradient term that constrains both the magnitude and the direction of the
//! Sobel gradient against a per-pixel max-selected reference gradient.
//!
//! Alongside the engine the crate provides complementary masking for
//! robustness experiments, four classic fusion objectives for comparison,
//! and the standard fusion-quality metrics.

pub mod color;
pub mod commask;
pub mod error;
pub mod fris;
pub mod fuser;
pub mod image;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod objective;
pub mod spatial;
pub mod synthetic;

pub use error::{FusionError, Result};
pub use image::{ColorImage, Image, Rect};

/// Engine version recorded in benchmark reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
