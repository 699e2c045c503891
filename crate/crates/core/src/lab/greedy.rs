use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::GaussianInstance;
use super::oracle::gaussian_mi;
use crate::error::{Error, Result};
use crate::mig::{self, PooledQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Highest cosine with the target first.
    Relevance,
    /// Highest `cos(x_i, q) - max_{j∈S} cos(x_i, x_j)` given the picks so far.
    Mig,
}

fn check_k(k: usize, inst: &GaussianInstance) -> Result<()> {
    if k < 1 || k > inst.n() {
        return Err(Error::OutOfRange { what: "selection size" });
    }
    Ok(())
}

/// Selection order of `k` features. Scores are cosines of the instance
/// embeddings, which equal the correlations. Ties go to the lowest index.
pub fn greedy_select(strategy: Strategy, k: usize, inst: &GaussianInstance) -> Result<Vec<usize>> {
    check_k(k, inst)?;
    let emb = inst.embeddings();
    let target = PooledQuery::from_vector(emb.row(inst.target()).to_vec());
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..inst.n()).filter(|i| !chosen.contains(i)) {
            let score = match strategy {
                Strategy::Relevance => mig::mig_score(emb, i, &target, [])?.relevance,
                Strategy::Mig => mig::mig_score(emb, i, &target, chosen.iter().copied())?.gain,
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        chosen.push(best.expect("k <= n leaves a candidate").0);
    }
    Ok(chosen)
}

/// Greedy on the exact mutual-information marginal gain.
pub fn greedy_true_mi(k: usize, inst: &GaussianInstance) -> Result<Vec<usize>> {
    check_k(k, inst)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut trial = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..inst.n()).filter(|i| !chosen.contains(i)) {
            trial.clear();
            trial.extend_from_slice(&chosen);
            trial.push(i);
            let mi = gaussian_mi(&trial, inst)?;
            if best.is_none_or(|(_, b)| mi > b) {
                best = Some((i, mi));
            }
        }
        chosen.push(best.expect("k <= n leaves a candidate").0);
    }
    Ok(chosen)
}
