use alloc::vec::Vec;

use super::instance::GaussianInstance;
use super::linalg::{cholesky, forward_substitute, sym_eigen};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Subsets whose correlation matrix has a larger condition number are
/// treated as degenerate.
pub const MAX_CONDITION: f64 = 1e12;
pub const BRUTE_FORCE_MAX_N: usize = 20;
pub const SUBMODULARITY_MAX_N: usize = 10;

/// `I(S; y) = -½ ln(1 - ρ_Sᵀ Σ_SS⁻¹ ρ_S)` in nats. Zero for the empty set.
pub fn gaussian_mi(set: &[usize], inst: &GaussianInstance) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let n = inst.n();
    // sorted so that the value depends on the set, not the pick order
    let mut set = set.to_vec();
    set.sort_unstable();
    for (pos, &i) in set.iter().enumerate() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if pos > 0 && set[pos - 1] == i {
            return Err(Error::DegenerateSet);
        }
    }
    let k = set.len();
    let corr = inst.corr();
    let mut sigma = Matrix::zeros(k, k);
    for (a, &i) in set.iter().enumerate() {
        for (b, &j) in set.iter().enumerate() {
            sigma.set(a, b, corr.get(i, j));
        }
    }
    if k > 1 {
        let eig = sym_eigen(&sigma);
        let max = eig.values[0];
        let min = eig.values[k - 1];
        if min <= 0.0 || max / min >= MAX_CONDITION {
            return Err(Error::DegenerateSet);
        }
    }
    let l = cholesky(&sigma).ok_or(Error::DegenerateSet)?;
    let rho: Vec<f64> = set.iter().map(|&i| inst.relevance(i)).collect();
    let z = forward_substitute(&l, &rho);
    let explained = z.iter().fold(0.0, |acc, v| acc + v * v);
    // explained variance is a squared multiple correlation, at most 1
    let residual = (1.0 - explained).max(f64::MIN_POSITIVE);
    Ok((-0.5 * libm::log(residual)).max(0.0))
}

/// The `k`-subset with the largest mutual information. Subsets are scanned
/// in lexicographic order and only a strictly larger value replaces the
/// incumbent, so ties go to the lexicographically smallest subset.
pub fn brute_force_best(k: usize, inst: &GaussianInstance) -> Result<Vec<usize>> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::EnumerationBound {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if k < 1 || k > n {
        return Err(Error::OutOfRange { what: "subset size" });
    }
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best = combo.clone();
    let mut best_mi = gaussian_mi(&combo, inst)?;
    while next_combination(&mut combo, n) {
        let mi = gaussian_mi(&combo, inst)?;
        if mi > best_mi {
            best_mi = mi;
            best.clone_from(&combo);
        }
    }
    Ok(best)
}

/// Advances to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for pos in (0..k).rev() {
        if combo[pos] < n - k + pos {
            combo[pos] += 1;
            for later in pos + 1..k {
                combo[later] = combo[later - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Mutual information of every subset, indexed by bitmask.
pub fn mi_table(inst: &GaussianInstance) -> Result<Vec<f64>> {
    let n = inst.n();
    if n > SUBMODULARITY_MAX_N {
        return Err(Error::EnumerationBound {
            n,
            max: SUBMODULARITY_MAX_N,
        });
    }
    let mut table = Vec::with_capacity(1 << n);
    let mut set = Vec::with_capacity(n);
    for mask in 0u32..(1 << n) {
        set.clear();
        set.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        table.push(gaussian_mi(&set, inst)?);
    }
    Ok(table)
}

/// Checks diminishing returns, `f(A+a) - f(A) ≥ f(A+a+b) - f(A+b)`, for
/// every set `A` and distinct `a, b ∉ A`, with 1e-12 slack.
pub fn is_submodular(inst: &GaussianInstance) -> Result<bool> {
    let n = inst.n();
    let f = mi_table(inst)?;
    for mask in 0usize..(1 << n) {
        for a in (0..n).filter(|a| mask & (1 << a) == 0) {
            for b in (a + 1..n).filter(|b| mask & (1 << b) == 0) {
                let with_a = mask | (1 << a);
                let with_b = mask | (1 << b);
                let both = with_a | (1 << b);
                if f[with_a] - f[mask] < f[both] - f[with_b] - 1e-12 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
