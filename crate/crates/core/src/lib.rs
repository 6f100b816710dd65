//! Correlation-aware multidimensional indexing.
//!
//! Attributes that are (softly) linear functions of another attribute are not
//! indexed at all. Queries on them are translated onto their predictor through
//! the learned line and its error margins, and records that stray outside the
//! margins live in a small full-dimensional outlier index so answers stay
//! exact.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod index;
pub mod model_file;
pub mod snapshot;
pub mod softfd;
pub mod synth;
pub mod theory;
pub mod translate;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use grid::{full_scan, GridConfig, GridIndex, GridMode, QueryStats};
pub use index::{CoaxConfig, CoaxIndex, CoaxQueryStats, IndexStats};
pub use softfd::{CorrelationGroup, DetectConfig, SoftFdModel};
pub use translate::{Interval, QueryRect};
