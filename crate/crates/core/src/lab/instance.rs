use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::sym_eigen;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Smallest eigenvalue accepted without projection.
pub const EIGEN_FLOOR: f64 = -1e-10;
/// Largest entry change a PSD projection may make before the profile is
/// rejected.
pub const MAX_PROJECTION_ADJUSTMENT: f64 = 0.05;
/// Required agreement between embedding dot products and correlations.
pub const FACTOR_TOLERANCE: f64 = 1e-8;

/// How an instance's correlation structure is generated. Features are
/// indexed from 0; the target is the last variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// A fixed `(n+1)×(n+1)` correlation matrix, target last.
    Explicit { corr: Vec<Vec<f64>> },
    /// Mutually uncorrelated features with target correlations drawn
    /// uniformly from the range (rescaled so the total explained variance
    /// stays below 0.95).
    Independent { relevance_min: f64, relevance_max: f64 },
    /// The first `top` features load on one shared factor with loadings in
    /// `[loading_min, loading_max]`, so they are pairwise correlated at
    /// `loading_min²` or more. The target loads on the shared factor with a
    /// weight in `[alpha_min, alpha_max]`, making those features the most
    /// relevant; the remaining features are independent with target
    /// correlations in `[rest_min, rest_max]`.
    RedundantTop {
        top: usize,
        loading_min: f64,
        loading_max: f64,
        alpha_min: f64,
        alpha_max: f64,
        rest_min: f64,
        rest_max: f64,
    },
    /// Correlations are the Gram matrix of `n+1` random unit vectors in
    /// `dim` dimensions.
    RandomGram { dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    pub profile: Profile,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianInstance {
    n: usize,
    corr: Matrix,
    embeddings: Matrix,
    projected: bool,
    max_adjustment: f64,
}

impl GaussianInstance {
    /// Validates a correlation matrix over `(x_1..x_n, y)`, projecting it to
    /// the nearest PSD correlation matrix if its smallest eigenvalue is below
    /// [`EIGEN_FLOOR`], and factorizes it into unit embeddings.
    pub fn from_correlation(corr: Matrix) -> Result<Self> {
        let size = corr.rows();
        if size < 2 || corr.cols() != size {
            return Err(Error::InvalidConfig("correlation matrix must be square with at least one feature"));
        }
        for i in 0..size {
            if libm::fabs(corr.get(i, i) - 1.0) > 1e-12 {
                return Err(Error::InvalidConfig("correlation matrix needs a unit diagonal"));
            }
            for j in 0..size {
                let v = corr.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { what: "correlation matrix" });
                }
                if libm::fabs(v - corr.get(j, i)) > 1e-12 {
                    return Err(Error::InvalidConfig("correlation matrix must be symmetric"));
                }
                if libm::fabs(v) > 1.0 + 1e-12 {
                    return Err(Error::InvalidConfig("correlations must lie in [-1, 1]"));
                }
            }
        }

        let eig = sym_eigen(&corr);
        let min_eig = eig.values.last().copied().unwrap_or(0.0);
        let (corr, eig, projected, max_adjustment) = if min_eig < EIGEN_FLOOR {
            let fixed = project_psd(&corr, &eig.values, &eig.vectors);
            let mut adj = 0.0f64;
            for (a, b) in fixed.as_slice().iter().zip(corr.as_slice()) {
                adj = adj.max(libm::fabs(a - b));
            }
            if adj > MAX_PROJECTION_ADJUSTMENT {
                return Err(Error::InfeasibleSpec { max_adjustment: adj });
            }
            let eig = sym_eigen(&fixed);
            (fixed, eig, true, adj)
        } else {
            (corr, eig, false, 0.0)
        };

        let mut embeddings = Matrix::zeros(size, size);
        for k in 0..size {
            // largest-magnitude component of each eigenvector is made positive
            let mut pivot = 0;
            for r in 1..size {
                if libm::fabs(eig.vectors.get(r, k)) > libm::fabs(eig.vectors.get(pivot, k)) {
                    pivot = r;
                }
            }
            let sign = if eig.vectors.get(pivot, k) < 0.0 { -1.0 } else { 1.0 };
            let scale = libm::sqrt(eig.values[k].max(0.0));
            for r in 0..size {
                embeddings.set(r, k, sign * eig.vectors.get(r, k) * scale);
            }
        }
        for i in 0..size {
            for j in 0..size {
                let d: f64 = embeddings.row(i).iter().zip(embeddings.row(j)).map(|(a, b)| a * b).sum();
                if libm::fabs(d - corr.get(i, j)) > FACTOR_TOLERANCE {
                    return Err(Error::InvalidConfig("factorization failed to reproduce correlations"));
                }
            }
        }
        Ok(GaussianInstance {
            n: size - 1,
            corr,
            embeddings,
            projected,
            max_adjustment,
        })
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn target(&self) -> usize {
        self.n
    }

    /// Correlation matrix, target in the last row and column.
    pub fn corr(&self) -> &Matrix {
        &self.corr
    }

    /// One unit row per variable, target last.
    pub fn embeddings(&self) -> &Matrix {
        &self.embeddings
    }

    /// Correlation of feature `i` with the target.
    pub fn relevance(&self, i: usize) -> f64 {
        self.corr.get(i, self.n)
    }

    pub fn projected(&self) -> bool {
        self.projected
    }

    pub fn max_adjustment(&self) -> f64 {
        self.max_adjustment
    }
}

/// Clips negative eigenvalues to zero and rescales back to a unit diagonal.
fn project_psd(corr: &Matrix, values: &[f64], vectors: &Matrix) -> Matrix {
    let n = corr.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for (k, &v) in values.iter().enumerate() {
                s += vectors.get(i, k) * v.max(0.0) * vectors.get(j, k);
            }
            out.set(i, j, s);
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| libm::sqrt(out.get(i, i).max(1e-300))).collect();
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { 1.0 } else { out.get(i, j) / (diag[i] * diag[j]) };
            out.set(i, j, v.clamp(-1.0, 1.0));
        }
    }
    out
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn check_range(lo: f64, hi: f64, min: f64, max: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && min <= lo && lo <= hi && hi <= max) {
        return Err(Error::InvalidConfig("profile range out of bounds"));
    }
    Ok(())
}

fn scale_to_budget(gammas: &mut [f64], budget: f64) {
    let total: f64 = gammas.iter().map(|g| g * g).sum();
    if total > budget {
        let s = libm::sqrt(budget / total);
        gammas.iter_mut().for_each(|g| *g *= s);
    }
}

/// Builds the correlation matrix for `profile` using `rng`.
pub fn profile_correlation<R: Rng + ?Sized>(n: usize, profile: &Profile, rng: &mut R) -> Result<Matrix> {
    if n < 1 {
        return Err(Error::InvalidConfig("instance needs at least one feature"));
    }
    let size = n + 1;
    let mut corr = Matrix::zeros(size, size);
    for i in 0..size {
        corr.set(i, i, 1.0);
    }
    match profile {
        Profile::Explicit { corr: rows } => {
            if rows.len() != size {
                return Err(Error::Shape {
                    expected: size,
                    found: rows.len(),
                });
            }
            return Matrix::from_rows(rows);
        }
        Profile::Independent {
            relevance_min,
            relevance_max,
        } => {
            check_range(*relevance_min, *relevance_max, -1.0, 1.0)?;
            let mut gammas: Vec<f64> = (0..n).map(|_| uniform(rng, *relevance_min, *relevance_max)).collect();
            scale_to_budget(&mut gammas, 0.95);
            for (i, g) in gammas.into_iter().enumerate() {
                corr.set(i, n, g);
                corr.set(n, i, g);
            }
        }
        Profile::RedundantTop {
            top,
            loading_min,
            loading_max,
            alpha_min,
            alpha_max,
            rest_min,
            rest_max,
        } => {
            if *top < 1 || *top > n {
                return Err(Error::InvalidConfig("top must be between 1 and n"));
            }
            check_range(*loading_min, *loading_max, 0.0, 1.0)?;
            check_range(*alpha_min, *alpha_max, 0.0, 1.0)?;
            check_range(*rest_min, *rest_max, -1.0, 1.0)?;
            let loadings: Vec<f64> = (0..*top).map(|_| uniform(rng, *loading_min, *loading_max)).collect();
            let alpha = uniform(rng, *alpha_min, *alpha_max);
            let mut gammas: Vec<f64> = (*top..n).map(|_| uniform(rng, *rest_min, *rest_max)).collect();
            scale_to_budget(&mut gammas, (0.98 - alpha * alpha).max(0.0));
            for i in 0..*top {
                for j in 0..*top {
                    if i != j {
                        corr.set(i, j, loadings[i] * loadings[j]);
                    }
                }
                corr.set(i, n, loadings[i] * alpha);
                corr.set(n, i, loadings[i] * alpha);
            }
            for (k, g) in gammas.into_iter().enumerate() {
                corr.set(top + k, n, g);
                corr.set(n, top + k, g);
            }
        }
        Profile::RandomGram { dim } => {
            if *dim < 1 {
                return Err(Error::InvalidConfig("dim must be positive"));
            }
            let mut vecs = Matrix::zeros(size, *dim);
            for i in 0..size {
                loop {
                    let row: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                    let norm = libm::sqrt(row.iter().map(|v| v * v).sum::<f64>());
                    if norm > 1e-6 {
                        for (dst, v) in vecs.row_mut(i).iter_mut().zip(row) {
                            *dst = v / norm;
                        }
                        break;
                    }
                }
            }
            for i in 0..size {
                for j in i + 1..size {
                    let d: f64 = vecs.row(i).iter().zip(vecs.row(j)).map(|(a, b)| a * b).sum();
                    let d = d.clamp(-1.0, 1.0);
                    corr.set(i, j, d);
                    corr.set(j, i, d);
                }
            }
        }
    }
    Ok(corr)
}

/// Deterministic instance for `spec.seed`.
pub fn gen_instance(spec: &InstanceSpec) -> Result<GaussianInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    gen_instance_with(spec.n, &spec.profile, &mut rng)
}

pub fn gen_instance_with<R: Rng + ?Sized>(n: usize, profile: &Profile, rng: &mut R) -> Result<GaussianInstance> {
    GaussianInstance::from_correlation(profile_correlation(n, profile, rng)?)
}
