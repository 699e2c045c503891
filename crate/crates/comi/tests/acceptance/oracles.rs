//! Reference implementations written without the kernel.

use comi_core::lab::GaussianInstance;
use comi_core::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn cos(u: &[f64], v: &[f64]) -> f64 {
    let (mut uv, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for k in 0..u.len() {
        uv += u[k] * v[k];
        uu += u[k] * u[k];
        vv += v[k] * v[k];
    }
    if uu == 0.0 || vv == 0.0 {
        0.0
    } else {
        uv / (uu.sqrt() * vv.sqrt())
    }
}

/// `(relevance, redundancy, gain)` per row, every row compared with all
/// others by a double loop.
pub fn mig_double_loop(x: &Matrix, q: &[f64]) -> Vec<(f64, f64, f64)> {
    (0..x.rows())
        .map(|i| {
            let rel = cos(x.row(i), q);
            let mut red: Option<f64> = None;
            for j in 0..x.rows() {
                if j != i {
                    let c = cos(x.row(i), x.row(j));
                    red = Some(red.map_or(c, |r| r.max(c)));
                }
            }
            let red = red.unwrap_or(0.0);
            (rel, red, rel - red)
        })
        .collect()
}

pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut credit, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                credit += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    credit / pairs
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// `-½ ln(1 - R²)` with `R²` from Gaussian elimination.
pub fn mi_elimination(set: &[usize], inst: &GaussianInstance) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let c = inst.corr();
    let y = inst.target();
    let a = set.iter().map(|&i| set.iter().map(|&j| c.get(i, j)).collect()).collect();
    let rho: Vec<f64> = set.iter().map(|&i| c.get(i, y)).collect();
    let beta = solve(a, rho.clone());
    let r2: f64 = beta.iter().zip(&rho).map(|(b, r)| b * r).sum();
    -0.5 * (1.0 - r2).ln()
}

/// Best `k`-subset MI by scanning every bitmask.
pub fn bitmask_best(k: usize, inst: &GaussianInstance) -> f64 {
    (0u32..1 << inst.n())
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| {
            let set: Vec<usize> = (0..inst.n()).filter(|i| m & (1 << i) != 0).collect();
            mi_elimination(&set, inst)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// MI estimated from sampled data by least-squares regression of the target
/// on the selected features.
pub fn monte_carlo_mi(set: &[usize], inst: &GaussianInstance, samples: usize, seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let v = inst.embeddings();
    let s = set.len();
    let mut xtx = vec![vec![0.0; s]; s];
    let mut xty = vec![0.0; s];
    let mut yy = 0.0;
    let mut z = vec![0.0; v.cols()];
    let mut x = vec![0.0; s];
    for _ in 0..samples {
        z.iter_mut().for_each(|zi| *zi = StandardNormal.sample(&mut r));
        let draw = |row: usize| v.row(row).iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        for (k, &i) in set.iter().enumerate() {
            x[k] = draw(i);
        }
        let t = draw(inst.target());
        for a in 0..s {
            for b in 0..s {
                xtx[a][b] += x[a] * x[b];
            }
            xty[a] += x[a] * t;
        }
        yy += t * t;
    }
    let beta = solve(xtx, xty.clone());
    let explained: f64 = beta.iter().zip(&xty).map(|(b, c)| b * c).sum();
    -0.5 * ((yy - explained) / yy).ln()
}

/// FLOP-counting arithmetic: multiply-accumulate 2, add or compare 1.
#[derive(Default)]
pub struct Counter {
    pub flops: u128,
}

impl Counter {
    pub fn mac(&mut self, acc: f64, a: f64, b: f64) -> f64 {
        self.flops += 2;
        acc + a * b
    }

    pub fn add(&mut self, a: f64, b: f64) -> f64 {
        self.flops += 1;
        a + b
    }

    pub fn dot(&mut self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).fold(0.0, |acc, (a, b)| self.mac(acc, *a, *b))
    }

    pub fn matvec(&mut self, x: &[f64], out: usize) -> Vec<f64> {
        (0..out)
            .map(|o| x.iter().enumerate().fold(0.0, |acc, (i, v)| self.mac(acc, *v, ((i * 3 + o) % 7) as f64 / 7.0)))
            .collect()
    }
}
