//! Building boundary sharpening for digital surface models.
//!
//! A DSM produced by dense stereo matching tends to smear height
//! discontinuities at building edges. This crate extracts building
//! boundaries from the DSM with a multi-scale white tophat, detects
//! straight line segments in the co-registered orthophoto, keeps the
//! segments that lie on DSM boundaries and then corrects the DSM with one
//! of two methods:
//!
//! * [`graphcut`]: assigns every boundary pixel a 2-D offset by minimizing
//!   a data + smoothness energy with α-expansion and max-flow, then warps
//!   the DSM by an interpolated dense offset field.
//! * [`planefit`]: fits a least-squares plane to the DSM on each side of
//!   every segment inside an adaptive rectangular buffer and overwrites the
//!   buffer from the planes, followed by feathering.
//!
//! [`evaluate`] scores results against a reference surface and [`synth`]
//! generates synthetic scenes with known ground truth. [`pipeline`] chains
//! the stages and writes every intermediate artifact to disk.

pub mod error;
pub mod evaluate;
pub mod graphcut;
pub mod linedet;
pub mod pipeline;
pub mod planefit;
pub mod raster;
pub mod synth;
pub mod tophat;

pub use error::{Error, Result};
