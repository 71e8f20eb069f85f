//! Unsupervised discovery of the ordered main steps shared by a corpus of
//! narrated items, and localization of those steps in per-item feature
//! streams.
//!
//! The pipeline has two stages. [`textalign`] aligns the narration token
//! sequences into a common template by Frank-Wolfe on a relaxed
//! sum-of-pairs objective and keeps the most supported template slots as
//! steps. [`vidcluster`] then places each step once per item, in order,
//! by discriminative clustering of the features under the caption timing
//! constraints. [`evalkit`] scores the results and [`synthgen`] produces
//! synthetic corpora with known ground truth.

pub mod error;
pub mod evalkit;
pub mod synthgen;
pub mod textalign;
pub mod vidcluster;

pub use error::{Error, Result};
