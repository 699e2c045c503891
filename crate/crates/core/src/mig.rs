//! Cosine similarity, query pooling and marginal information gain.
//!
//! The gain of token `x_i` against a comparison set `P` is
//!
//! ```text
//! G(x_i) = cos(x_i, q̄) - max_{j ∈ P} cos(x_i, x_j)
//! ```
//!
//! with the redundancy term taken as 0 when `P` is empty. The comparison set
//! is always supplied by the caller: group reallocation compares group
//! representatives with each other, token merging compares tokens inside a
//! group.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::dot;

/// Cosine similarity clamped to `[-1, 1]`. A zero vector on either side
/// gives 0.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Shape {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(cosine_unchecked(u, v))
}

pub(crate) fn cosine_unchecked(u: &[f64], v: &[f64]) -> f64 {
    // sqrt of the product (rather than the product of norms) makes the
    // cosine of a vector with itself exactly 1
    let denom = libm::sqrt(dot(u, u) * dot(v, v));
    if denom == 0.0 {
        return 0.0;
    }
    (dot(u, v) / denom).clamp(-1.0, 1.0)
}

/// Mean of the query rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledQuery {
    vector: Vec<f64>,
}

impl PooledQuery {
    /// Wraps an already pooled vector.
    pub fn from_vector(vector: Vec<f64>) -> Self {
        PooledQuery { vector }
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

pub fn pool_query(query: &Matrix) -> Result<PooledQuery> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let mut acc = alloc::vec![0.0; query.cols()];
    for row in query.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = query.rows() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(PooledQuery { vector: acc })
}

/// Relevance, redundancy and gain of one token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    pub index: usize,
    pub relevance: f64,
    pub redundancy: f64,
    pub gain: f64,
    pub argmax_peer: Option<usize>,
}

fn check_query(x: &Matrix, qbar: &PooledQuery) -> Result<()> {
    if qbar.dim() != x.cols() {
        return Err(Error::Shape {
            expected: x.cols(),
            found: qbar.dim(),
        });
    }
    Ok(())
}

/// Gain of row `i` of `x` against the rows listed in `peers`.
///
/// Ties in the redundancy maximum resolve to the lowest peer index whatever
/// order the peers arrive in.
pub fn mig_score<I>(x: &Matrix, i: usize, qbar: &PooledQuery, peers: I) -> Result<GainRecord>
where
    I: IntoIterator<Item = usize>,
{
    check_query(x, qbar)?;
    let n = x.rows();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let xi = x.row(i);
    let relevance = cosine_unchecked(xi, qbar.vector());
    let mut best: Option<(usize, f64)> = None;
    for j in peers {
        if j == i {
            return Err(Error::SelfComparison { index: i });
        }
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
        let c = cosine_unchecked(xi, x.row(j));
        best = match best {
            Some((bj, bc)) if bc > c || (bc == c && bj < j) => Some((bj, bc)),
            _ => Some((j, c)),
        };
    }
    let (argmax_peer, redundancy) = match best {
        Some((j, c)) => (Some(j), c),
        None => (None, 0.0),
    };
    Ok(GainRecord {
        index: i,
        relevance,
        redundancy,
        gain: relevance - redundancy,
        argmax_peer,
    })
}

/// Gains for every row of `x`; `comparison[i]` lists the peers of row `i`.
pub fn mig_scores(x: &Matrix, qbar: &PooledQuery, comparison: &[Vec<usize>]) -> Result<Vec<GainRecord>> {
    if comparison.len() != x.rows() {
        return Err(Error::Shape {
            expected: x.rows(),
            found: comparison.len(),
        });
    }
    comparison
        .iter()
        .enumerate()
        .map(|(i, peers)| mig_score(x, i, qbar, peers.iter().copied()))
        .collect()
}

/// Gains for every row of `x`, each compared against all other rows.
pub fn mig_scores_all(x: &Matrix, qbar: &PooledQuery) -> Result<Vec<GainRecord>> {
    (0..x.rows())
        .map(|i| mig_score(x, i, qbar, (0..x.rows()).filter(move |&j| j != i)))
        .collect()
}

/// Index (into `x`) of the row in `start..end` most similar to the pooled
/// query. Ties go to the lowest index.
pub fn representative(x: &Matrix, start: usize, end: usize, qbar: &PooledQuery) -> Result<usize> {
    check_query(x, qbar)?;
    if start >= end {
        return Err(Error::EmptySegment);
    }
    if end > x.rows() {
        return Err(Error::IndexOutOfRange {
            index: end - 1,
            len: x.rows(),
        });
    }
    let mut best = start;
    let mut best_score = cosine_unchecked(x.row(start), qbar.vector());
    for i in start + 1..end {
        let s = cosine_unchecked(x.row(i), qbar.vector());
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    Ok(best)
}
