//! Analytic FLOPs model for compression plus generation.
//!
//! Counting convention: one multiply-accumulate is 2 FLOPs, a bare addition
//! or comparison is 1 FLOP. Cosines are costed as a single `d`-long dot
//! product over pre-normalized vectors. Softmax exponentials and norms are
//! not counted.
//!
//! Per decoder layer, a token attending to `kv` earlier positions costs
//! `8d²` (Q, K, V, O projections) `+ 4·d·kv` (scores and value mix)
//! `+ 4·d·d_ff` (feed-forward). Each forward pass that emits a token adds
//! `2·d·vocab` for the output projection. Prefill processes the context and
//! query causally, token `j` (0-based) attending to `j` positions.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realloc::{initial_partition, CompressionConfig};

pub const CONVENTION: &str = "1 MAC = 2 FLOPs; add/compare = 1 FLOP; cosine = 2d; \
decoder layer per token = 8d^2 + 4d*kv + 4d*d_ff; output projection = 2d*vocab per emitted token; \
compression sized on the initial equal partition";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub layers: u64,
    pub d_model: u64,
    pub d_ff: u64,
    pub n_heads: u64,
    pub vocab: u64,
}

impl ModelDims {
    /// LLaMA-2-7B shaped decoder.
    pub const PRESET_7B: ModelDims = ModelDims {
        layers: 32,
        d_model: 4096,
        d_ff: 11008,
        n_heads: 32,
        vocab: 32000,
    };

    pub fn preset(name: &str) -> Option<ModelDims> {
        match name {
            "7b" => Some(ModelDims::PRESET_7B),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.d_model == 0 || self.d_ff == 0 || self.n_heads == 0 || self.vocab == 0 {
            return Err(Error::InvalidConfig("model dimensions must be positive"));
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::InvalidConfig("d_model must be divisible by n_heads"));
        }
        Ok(())
    }

    /// FLOPs for one token through one layer with `kv` attended positions.
    pub fn layer_token_flops(&self, kv: u64) -> u128 {
        let d = self.d_model as u128;
        8 * d * d + 4 * d * kv as u128 + 4 * d * self.d_ff as u128
    }

    fn output_flops(&self) -> u128 {
        2 * self.d_model as u128 * self.vocab as u128
    }

    /// One layer over `n` tokens, causally.
    fn causal_layer_flops(&self, n: u64) -> u128 {
        let n = n as u128;
        let d = self.d_model as u128;
        let per_token = 8 * d * d + 4 * d * self.d_ff as u128;
        // Σ_{j<n} 4·d·j
        n * per_token + 4 * d * (n * n.saturating_sub(1) / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionFlops {
    /// Query mean pooling: one addition per query element.
    pub query_pooling: u128,
    /// Representative scan, peer cosines, and the apportionment sort.
    pub group_realloc: u128,
    /// Intra-group cosines and weighted sums.
    pub pooling_merge: u128,
    /// One decoder layer over the compressed tokens; 0 when excluded.
    pub lsa_placeholder: u128,
}

impl CompressionFlops {
    pub fn total(&self) -> u128 {
        self.query_pooling + self.group_realloc + self.pooling_merge + self.lsa_placeholder
    }
}

fn ceil_log2(m: u64) -> u64 {
    if m <= 1 {
        0
    } else {
        u64::from(64 - (m - 1).leading_zeros())
    }
}

pub fn compression_flops(
    context_len: u64,
    query_len: u64,
    rate: u64,
    dims: &ModelDims,
    include_lsa: bool,
) -> Result<CompressionFlops> {
    dims.validate()?;
    let part = initial_partition(context_len as usize, &CompressionConfig::new(rate as usize))?;
    let d = dims.d_model as u128;
    let m = part.len() as u64;
    let mm = m as u128;
    let group_realloc =
        context_len as u128 * 2 * d + mm * (mm - 1) * 2 * d + (m * ceil_log2(m)) as u128;
    let pooling_merge = part
        .sizes()
        .iter()
        .map(|&s| {
            let s = s as u128;
            s * s * 2 * d + s * 2 * d
        })
        .sum();
    let lsa_placeholder = if include_lsa { dims.causal_layer_flops(m) } else { 0 };
    Ok(CompressionFlops {
        query_pooling: query_len as u128 * d,
        group_realloc,
        pooling_merge,
        lsa_placeholder,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationFlops {
    /// Step 0 is prefill; step `i ≥ 1` decodes one token.
    pub steps: Vec<u128>,
    pub decode_total: u128,
    pub total: u128,
}

pub fn generation_flops(context_len: u64, query_len: u64, answer_len: u64, dims: &ModelDims) -> Result<GenerationFlops> {
    dims.validate()?;
    let prompt = context_len + query_len;
    let prefill = if prompt == 0 {
        0
    } else {
        dims.layers as u128 * dims.causal_layer_flops(prompt) + dims.output_flops()
    };
    let mut steps = Vec::with_capacity(answer_len as usize + 1);
    steps.push(prefill);
    let mut decode_total = 0u128;
    for i in 1..=answer_len {
        let step = dims.layers as u128 * dims.layer_token_flops(prompt + i - 1) + dims.output_flops();
        decode_total += step;
        steps.push(step);
    }
    Ok(GenerationFlops {
        steps,
        decode_total,
        total: prefill + decode_total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub convention: String,
    pub dims: ModelDims,
    pub context_len: u64,
    pub compressed_len: u64,
    pub query_len: u64,
    pub answer_len: u64,
    pub rate: u64,
    pub compression: CompressionFlops,
    pub compression_total: u128,
    pub generation: GenerationFlops,
    pub total: u128,
    pub baseline: GenerationFlops,
    pub baseline_total: u128,
    pub speedup_ratio: f64,
}

/// Compressed pipeline versus running the decoder on the full context.
pub fn end_to_end_report(
    context_len: u64,
    query_len: u64,
    answer_len: u64,
    rate: u64,
    dims: &ModelDims,
    include_lsa: bool,
) -> Result<CostReport> {
    let compression = compression_flops(context_len, query_len, rate, dims, include_lsa)?;
    let compressed_len = CompressionConfig::new(rate as usize).group_count(context_len as usize) as u64;
    let generation = generation_flops(compressed_len, query_len, answer_len, dims)?;
    let baseline = generation_flops(context_len, query_len, answer_len, dims)?;
    let compression_total = compression.total();
    let total = compression_total + generation.total;
    let baseline_total = baseline.total;
    Ok(CostReport {
        convention: CONVENTION.into(),
        dims: *dims,
        context_len,
        compressed_len,
        query_len,
        answer_len,
        rate,
        compression,
        compression_total,
        generation,
        total,
        baseline,
        baseline_total,
        speedup_ratio: baseline_total as f64 / total as f64,
    })
}
