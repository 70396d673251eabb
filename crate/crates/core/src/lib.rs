//! Egg-candling embryo detection pipeline.
//!
//! A candled egg photo is segmented in CIELAB space with k-means (k = 3:
//! background, egg, yolk), the retained region is converted to grayscale and
//! sharpened with HE + CLAHE, binarized, grown with dilation and thickening,
//! traced with a Canny edge detector, and finally scored with MSE and mean
//! SSIM. Every operator is exposed on its own; [`pipeline::run_pipeline`]
//! wires them end to end and writes one artifact per stage.
//!
//! The library performs no hidden I/O and no hidden randomness: file access
//! is confined to [`io`] and [`pipeline`], and every stochastic choice flows
//! from an explicit 64-bit seed.

pub mod colorspace;
pub mod enhance;
pub mod error;
pub mod io;
pub mod kmeans;
pub mod metrics;
pub mod morphology;
pub mod phantom;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod segment;

pub use error::{Error, Result};
pub use raster::{BinaryMask, GrayImage, RasterImage, Rect};
