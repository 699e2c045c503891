#![allow(dead_code)]

use std::path::Path;

use comi::write_embeddings;
use comi_core::{EmbeddingMatrix, Matrix, Role};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(r)).collect()).unwrap()
}

pub fn gaussian_emb(r: &mut impl Rng, role: Role, rows: usize, cols: usize) -> EmbeddingMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(r)).collect();
    EmbeddingMatrix::new(role, rows, cols, data).unwrap()
}

pub fn write_emb(path: &Path, m: &EmbeddingMatrix) {
    write_embeddings(m, std::fs::File::create(path).unwrap()).unwrap();
}
