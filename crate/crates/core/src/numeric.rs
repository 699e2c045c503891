use alloc::vec::Vec;

use crate::error::{Error, Result};

// All reductions run left to right so results do not depend on how callers
// schedule work.

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b)
}

/// `exp(x_i - max x) / Σ exp(x_j - max x)`.
pub(crate) fn softmax(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "gains" });
    }
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|&x| libm::exp(x - max)).collect();
    let total = exps.iter().fold(0.0, |acc, e| acc + e);
    Ok(exps.into_iter().map(|e| e / total).collect())
}
