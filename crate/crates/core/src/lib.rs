//! Scene-semantic priors and detection tooling for infrared maritime
//! imagery.
//!
//! The pipeline stages are:
//!
//! 1. **integral** – summed-area tables serving every rectangular mean.
//! 2. **sse** – per-pixel multi-scale contrast prior, weighted by background
//!    variation and bit-split into low/high channels.
//! 3. **gradbank** – eight-direction fixed-weight gradient features with
//!    linear and square encodings.
//! 4. **trimap** – positive/negative/unknown supervision masks from box
//!    annotations and land/cloud scene masks.
//! 5. **detect** – threshold + connected components + scene-consistency
//!    filtering over the raw prior map.
//! 6. **augment** – MixUp, mosaic and affine operators plus the decaying
//!    augmented-ratio schedule.
//! 7. **eval** – IoU, greedy matching and COCO-style average precision.
//!
//! Everything is generic over the pixel scalar (f32 or f64, see
//! [`Scalar`]); window statistics always accumulate in f64. The `reference`
//! module holds deliberately naive reimplementations used as oracles.

pub mod augment;
pub mod bbox;
pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod formats;
pub mod gradbank;
pub mod image;
pub mod integral;
pub mod reference;
pub mod sse;
pub mod trimap;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GrayImageF32 = image::GrayImage<f32>;
pub type GrayImageF64 = image::GrayImage<f64>;
pub type PriorMapF32 = sse::PriorMap<f32>;
pub type PriorMapF64 = sse::PriorMap<f64>;
pub type BBoxF32 = bbox::BBox<f32>;
pub type BBoxF64 = bbox::BBox<f64>;
pub type DetectionF64 = bbox::Detection<f64>;
pub type AnnotationF64 = bbox::Annotation<f64>;
