//! Core algorithms for bushfire-intensity modelling: spatio-temporal fusion of
//! fire detections with station weather and vegetation-index samples, feature
//! engineering, class rebalancing, from-scratch learners, stacking, and
//! imbalanced-classification metrics.
//!
//! The crate is `no_std`-compatible (with `alloc`); all float math is routed
//! through [`libm`] so results are bit-identical with and without the standard
//! library. File I/O, parsing, and orchestration live in the companion
//! `pyrocast` crate.
//!
//! Determinism is a contract throughout: every fit is a pure function of
//! `(data, config, seed)`, and with the `parallel` feature enabled all
//! parallel paths derive per-unit seeds and merge in a fixed order, so results
//! are independent of thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod date;
pub mod error;
pub mod features;
pub mod forest;
pub mod fuse;
pub mod gbdt;
pub mod geo;
pub mod linear;
mod math;
pub mod metrics;
pub mod mlp;
pub mod model;
#[cfg(feature = "reference")]
pub mod reference;
pub mod resample;
pub mod search;
pub mod seeding;
pub mod stack;
pub mod threshold;
pub mod tree;
pub mod types;

pub use dataset::Matrix;
pub use error::Error;

/// Convenience alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
