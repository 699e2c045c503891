//! Fine-grained token merging and the end-to-end compression pipeline.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mig::{self, GainRecord, PooledQuery};
use crate::numeric::softmax;
use crate::realloc::{self, CompressionConfig, ReallocTrace, Reallocation};

/// Gains of every token in `group`, each compared against the other tokens
/// of the same group. Record indices are positions within `group`.
pub fn intra_group_gains(group: &Matrix, qbar: &PooledQuery) -> Result<Vec<GainRecord>> {
    if group.is_empty() {
        return Err(Error::EmptySegment);
    }
    mig::mig_scores_all(group, qbar)
}

/// Softmax of the gains, max-subtracted. Every weight is strictly positive.
pub fn merge_weights(gains: &[f64]) -> Result<Vec<f64>> {
    softmax(gains)
}

/// `Σ_k w_k h_k` with `w = softmax(gains)`, summed in row order.
pub fn merge_group(group: &Matrix, gains: &[f64]) -> Result<Vec<f64>> {
    if gains.len() != group.rows() {
        return Err(Error::Shape {
            expected: group.rows(),
            found: gains.len(),
        });
    }
    if group.is_empty() {
        return Err(Error::EmptySegment);
    }
    let weights = merge_weights(gains)?;
    Ok(weighted_sum(group, &weights))
}

fn weighted_sum(group: &Matrix, weights: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; group.cols()];
    for (row, w) in group.iter_rows().zip(weights) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += w * v;
        }
    }
    out
}

/// Everything produced while merging one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMerge {
    /// Intra-group gains, indexed by context position.
    pub gains: Vec<GainRecord>,
    pub weights: Vec<f64>,
    pub token: Vec<f64>,
}

/// Merges rows `start..end` of `h`. Independent of every other group, so
/// groups may be processed in any order or concurrently.
pub fn merge_segment(h: &Matrix, start: usize, end: usize, qbar: &PooledQuery) -> Result<GroupMerge> {
    let group = h.slice_rows(start, end);
    let mut gains = intra_group_gains(&group, qbar)?;
    let raw: Vec<f64> = gains.iter().map(|g| g.gain).collect();
    let weights = merge_weights(&raw)?;
    let token = weighted_sum(&group, &weights);
    for g in gains.iter_mut() {
        g.index += start;
        g.argmax_peer = g.argmax_peer.map(|p| p + start);
    }
    Ok(GroupMerge {
        gains,
        weights,
        token,
    })
}

/// Compressed context tokens plus the trace of how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedContext {
    pub tokens: Matrix,
    pub reallocation: Reallocation,
    pub groups: Vec<GroupMerge>,
}

/// Serialized trace of a compression run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionTrace {
    pub reallocation: ReallocTrace,
    pub group_gains: Vec<GainRecord>,
    pub token_gains: Vec<Vec<GainRecord>>,
    pub merge_weights: Vec<Vec<f64>>,
}

impl CompressedContext {
    pub fn trace(&self) -> CompressionTrace {
        CompressionTrace {
            reallocation: self.reallocation.trace(),
            group_gains: self.reallocation.gains.clone(),
            token_gains: self.groups.iter().map(|g| g.gains.clone()).collect(),
            merge_weights: self.groups.iter().map(|g| g.weights.clone()).collect(),
        }
    }
}

/// Validates the inputs of [`compress`] and pools the query.
pub fn prepare(h: &Matrix, q: &Matrix, cfg: &CompressionConfig) -> Result<PooledQuery> {
    cfg.validate()?;
    if h.is_empty() {
        return Err(Error::EmptyContext);
    }
    if q.cols() != h.cols() {
        return Err(Error::Shape {
            expected: h.cols(),
            found: q.cols(),
        });
    }
    mig::pool_query(q)
}

/// Concatenates merged groups, in group order, into the output matrix.
pub fn assemble(reallocation: Reallocation, groups: Vec<GroupMerge>, cols: usize) -> Result<CompressedContext> {
    let mut data = Vec::with_capacity(groups.len() * cols);
    for g in &groups {
        data.extend_from_slice(&g.token);
    }
    let tokens = Matrix::new(groups.len(), cols, data)?;
    Ok(CompressedContext {
        tokens,
        reallocation,
        groups,
    })
}

/// Pools the query, reallocates group sizes, and merges each group into one
/// token. Output has `max(1, len / rate)` rows. The query itself is not part
/// of the output.
pub fn compress(h: &Matrix, q: &Matrix, cfg: &CompressionConfig) -> Result<CompressedContext> {
    let qbar = prepare(h, q, cfg)?;
    let reallocation = realloc::reallocate(h, &qbar, cfg)?;
    let groups = reallocation
        .after
        .ranges()
        .into_iter()
        .map(|r| merge_segment(h, r.start, r.end, &qbar))
        .collect::<Result<Vec<_>>>()?;
    assemble(reallocation, groups, h.cols())
}
