//! Diagnostics for scoring functions: AUC, redundancy of a retained set,
//! and top-k retention.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mig::cosine_unchecked;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<u8>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch {
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite { what: "scores" });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::OutOfRange { what: "label" });
        }
        Ok(LabeledScores { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, with ties worth one half.
///
/// Computed from midranks in `O(n log n)`.
pub fn auc(ls: &LabeledScores) -> Result<f64> {
    let n_pos = ls.labels.iter().filter(|&&l| l == 1).count();
    let n_neg = ls.labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..ls.scores.len()).collect();
    order.sort_by(|&a, &b| ls.scores[a].total_cmp(&ls.scores[b]));

    // Twice the positive rank sum keeps midranks integral.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && ls.scores[order[end]] == ls.scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end, midrank (start + 1 + end) / 2
        let twice_mid = (start + 1 + end) as u128;
        let pos_in_run = order[start..end].iter().filter(|&&i| ls.labels[i] == 1).count() as u128;
        twice_rank_sum += twice_mid * pos_in_run;
        start = end;
    }
    let np = n_pos as u128;
    let twice_u = twice_rank_sum - np * (np + 1);
    Ok(twice_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Mean cosine similarity over ordered pairs of distinct rows; 0 for at most
/// one row.
pub fn redundancy_score(e: &Matrix) -> f64 {
    let k = e.rows();
    if k <= 1 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                total += cosine_unchecked(e.row(i), e.row(j));
            }
        }
    }
    total / (k as f64 * (k as f64 - 1.0))
}

/// Number of items kept when retaining a fraction `ratio` of `n`.
///
/// `ratio * n` within 1e-9 of an integer counts as that integer, so that
/// e.g. `0.1 * 30` keeps 3 items rather than 4.
pub fn retention_count(n: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::OutOfRange { what: "retention ratio" });
    }
    let x = ratio * n as f64;
    let nearest = libm::round(x);
    let k = if libm::fabs(x - nearest) <= 1e-9 {
        nearest
    } else {
        libm::ceil(x)
    };
    Ok((k as usize).min(n))
}

/// Indices of the top `ceil(ratio * n)` scores, ties to the lower index,
/// returned in ascending order.
pub fn retention_select(scores: &[f64], ratio: f64) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::EmptySegment);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite { what: "scores" });
    }
    let k = retention_count(scores.len(), ratio)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut kept = order[..k].to_vec();
    kept.sort_unstable();
    Ok(kept)
}
