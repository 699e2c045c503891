//! Marginal-information-gain context compression kernel.
//!
//! Everything in this crate is pure computation over in-memory buffers and
//! builds without `std` (an allocator is required). File IO, threading and
//! the command-line surface live in the `comi` crate.
//!
//! The compression pipeline is:
//!
//! 1. [`mig::pool_query`] averages the query rows into a single vector.
//! 2. [`realloc::reallocate`] splits the context into equal groups, scores
//!    each group's representative token by marginal information gain
//!    (relevance minus redundancy) and resizes the groups so that
//!    informative groups are compressed less.
//! 3. [`merge::compress`] collapses every resized group into one token via a
//!    softmax over intra-group gains.
//!
//! [`metrics`], [`lab`] and [`cost`] hold the diagnostics: AUC and
//! redundancy scores, greedy selection under a Gaussian mutual-information
//! oracle, and an analytic FLOPs model.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod codec;
pub mod cost;
pub mod error;
pub mod lab;
pub mod matrix;
pub mod merge;
pub mod metrics;
pub mod mig;
mod numeric;
pub mod realloc;

pub use error::{Error, Result};
pub use matrix::{EmbeddingMatrix, Matrix, Role};
pub use merge::{compress, CompressedContext};
pub use mig::{cosine, pool_query, GainRecord, PooledQuery};
pub use realloc::{CompressionConfig, GroupPartition, RedundancyScope};
