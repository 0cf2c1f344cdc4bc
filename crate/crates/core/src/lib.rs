//! Object mapping with super-quadric bounding volumes.
//!
//! Streams of posed 2D detections are associated frame-to-model against the
//! current map, and each mapped object is fitted by MAP estimation: a
//! super-quadric whose projected image boxes match the detections, regularized
//! by a per-category Gaussian prior on its half extents.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod optimizer;
pub mod par;
pub mod pipeline;
pub mod simulator;

pub use error::{Error, Result};
