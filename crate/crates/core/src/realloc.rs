//! Coarse-grained group reallocation.
//!
//! The context is cut into `m` equal contiguous groups. Each group is
//! represented by its most query-similar token, the representatives are
//! scored by marginal information gain, and the group sizes are redrawn in
//! proportion to `softmax(-gain)`: informative, non-redundant groups end up
//! smaller and are therefore compressed less. The group count never changes.

use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mig::{self, GainRecord, PooledQuery};
use crate::numeric::softmax;

/// Which tokens a group representative is compared against when measuring
/// redundancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RedundancyScope {
    /// The other groups' representatives.
    #[default]
    Representatives,
    /// Every token outside the representative's own group.
    AllTokens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionConfig {
    /// Target ratio of input tokens to output tokens.
    pub rate: usize,
    #[serde(default)]
    pub redundancy_scope: RedundancyScope,
    #[serde(default = "default_min_group_size")]
    pub min_group_size: usize,
}

fn default_min_group_size() -> usize {
    1
}

impl CompressionConfig {
    pub fn new(rate: usize) -> Self {
        CompressionConfig {
            rate,
            redundancy_scope: RedundancyScope::default(),
            min_group_size: 1,
        }
    }

    pub fn with_scope(mut self, scope: RedundancyScope) -> Self {
        self.redundancy_scope = scope;
        self
    }

    pub fn with_min_group_size(mut self, min: usize) -> Self {
        self.min_group_size = min;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rate < 1 {
            return Err(Error::InvalidConfig("rate must be at least 1"));
        }
        if self.min_group_size < 1 {
            return Err(Error::InvalidConfig("min_group_size must be at least 1"));
        }
        Ok(())
    }

    /// Number of groups (and output tokens) for a context of `len` tokens.
    pub fn group_count(&self, len: usize) -> usize {
        (len / self.rate).max(1)
    }
}

/// Ordered sizes of contiguous, non-overlapping groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    sizes: Vec<usize>,
}

impl GroupPartition {
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidConfig("partition needs at least one group"));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidConfig("group sizes must be positive"));
        }
        Ok(GroupPartition { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Start offset of every group.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        self.offsets()
            .into_iter()
            .zip(&self.sizes)
            .map(|(start, &s)| start..start + s)
            .collect()
    }

    /// Group that owns token `i`.
    pub fn group_of(&self, i: usize) -> Option<usize> {
        let mut end = 0;
        for (g, &s) in self.sizes.iter().enumerate() {
            end += s;
            if i < end {
                return Some(g);
            }
        }
        None
    }
}

/// Share of the token budget assigned to each group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationWeights {
    weights: Vec<f64>,
}

impl AllocationWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

pub fn initial_partition(len: usize, cfg: &CompressionConfig) -> Result<GroupPartition> {
    cfg.validate()?;
    if len < 1 {
        return Err(Error::EmptyContext);
    }
    let m = cfg.group_count(len);
    let base = len / m;
    let extra = len % m;
    let sizes = (0..m).map(|g| base + usize::from(g < extra)).collect();
    GroupPartition::from_sizes(sizes)
}

fn check_cover(h: &Matrix, part: &GroupPartition) -> Result<()> {
    if part.total() != h.rows() {
        return Err(Error::Shape {
            expected: h.rows(),
            found: part.total(),
        });
    }
    Ok(())
}

/// Representative token (context index) of every group.
pub fn representatives(h: &Matrix, part: &GroupPartition, qbar: &PooledQuery) -> Result<Vec<usize>> {
    check_cover(h, part)?;
    part.ranges()
        .into_iter()
        .map(|r| mig::representative(h, r.start, r.end, qbar))
        .collect()
}

/// Gain of group `g`'s representative under the configured scope.
pub fn group_gain(
    h: &Matrix,
    part: &GroupPartition,
    reps: &[usize],
    g: usize,
    qbar: &PooledQuery,
    scope: RedundancyScope,
) -> Result<GainRecord> {
    let rep = reps[g];
    match scope {
        RedundancyScope::Representatives => {
            let peers = reps
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != g)
                .map(|(_, &r)| r);
            mig::mig_score(h, rep, qbar, peers)
        }
        RedundancyScope::AllTokens => {
            let own = part.ranges()[g].clone();
            let peers = (0..h.rows()).filter(move |j| !own.contains(j));
            mig::mig_score(h, rep, qbar, peers)
        }
    }
}

/// One gain record per group, indexed by the representative's context
/// position.
pub fn group_gains(
    h: &Matrix,
    part: &GroupPartition,
    qbar: &PooledQuery,
    cfg: &CompressionConfig,
) -> Result<Vec<GainRecord>> {
    let reps = representatives(h, part, qbar)?;
    (0..part.len())
        .map(|g| group_gain(h, part, &reps, g, qbar, cfg.redundancy_scope))
        .collect()
}

/// `P_i = softmax(-G)_i`, max-subtracted.
pub fn allocation_weights(gains: &[f64]) -> Result<AllocationWeights> {
    let neg: Vec<f64> = gains.iter().map(|g| -g).collect();
    Ok(AllocationWeights {
        weights: softmax(&neg)?,
    })
}

/// Largest-remainder rounding of `budget * weights` to integers summing to
/// `budget`. Equal remainders go to the lower index.
pub fn apportion(weights: &[f64], budget: usize) -> Vec<usize> {
    let targets: Vec<f64> = weights.iter().map(|w| budget as f64 * w).collect();
    let mut sizes: Vec<usize> = targets.iter().map(|t| libm::floor(*t) as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = targets[a] - sizes[a] as f64;
        let rb = targets[b] - sizes[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = budget.saturating_sub(assigned);
    while left > 0 {
        for &i in &order {
            if left == 0 {
                break;
            }
            sizes[i] += 1;
            left -= 1;
        }
    }
    sizes
}

/// Group sizes for a token budget: softmax of negative gains, apportioned by
/// largest remainder, then topped up to `min_group_size` with the shortfall
/// taken one token at a time from the currently largest group.
pub fn allocate_sizes(gains: &[f64], budget: usize, cfg: &CompressionConfig) -> Result<GroupPartition> {
    cfg.validate()?;
    if gains.is_empty() {
        return Err(Error::InvalidConfig("no groups to allocate"));
    }
    let required = gains.len() * cfg.min_group_size;
    if budget < required {
        return Err(Error::InfeasibleBudget { budget, required });
    }
    let weights = allocation_weights(gains)?;
    let mut sizes = apportion(weights.as_slice(), budget);
    enforce_minimum(&mut sizes, cfg.min_group_size);
    GroupPartition::from_sizes(sizes)
}

fn enforce_minimum(sizes: &mut [usize], min: usize) {
    let mut shortfall = 0;
    for s in sizes.iter_mut() {
        if *s < min {
            shortfall += min - *s;
            *s = min;
        }
    }
    while shortfall > 0 {
        // first maximum wins ties
        let donor = sizes
            .iter()
            .enumerate()
            .fold(0, |best, (i, &s)| if s > sizes[best] { i } else { best });
        debug_assert!(sizes[donor] > min);
        sizes[donor] -= 1;
        shortfall -= 1;
    }
}

/// Partitions before and after reallocation, with the scores that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reallocation {
    pub before: GroupPartition,
    pub after: GroupPartition,
    pub gains: Vec<GainRecord>,
    pub weights: AllocationWeights,
}

/// Serialized form of a [`Reallocation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReallocTrace {
    pub gains: Vec<f64>,
    pub weights: Vec<f64>,
    pub sizes_before: Vec<usize>,
    pub sizes_after: Vec<usize>,
}

impl Reallocation {
    pub fn trace(&self) -> ReallocTrace {
        ReallocTrace {
            gains: self.gains.iter().map(|g| g.gain).collect(),
            weights: self.weights.as_slice().to_vec(),
            sizes_before: self.before.sizes().to_vec(),
            sizes_after: self.after.sizes().to_vec(),
        }
    }
}

/// Builds the reallocation from precomputed group gains. Split out so that
/// callers can compute the gains in parallel.
pub fn finish_reallocation(
    before: GroupPartition,
    gains: Vec<GainRecord>,
    budget: usize,
    cfg: &CompressionConfig,
) -> Result<Reallocation> {
    let raw: Vec<f64> = gains.iter().map(|g| g.gain).collect();
    let weights = allocation_weights(&raw)?;
    let after = allocate_sizes(&raw, budget, cfg)?;
    Ok(Reallocation {
        before,
        after,
        gains,
        weights,
    })
}

/// Initial partition, group gains, and resized partition of `h`. The token
/// budget is the context length, so the new partition covers `h` exactly.
pub fn reallocate(h: &Matrix, qbar: &PooledQuery, cfg: &CompressionConfig) -> Result<Reallocation> {
    let before = initial_partition(h.rows(), cfg)?;
    let gains = group_gains(h, &before, qbar, cfg)?;
    finish_reallocation(before, gains, h.rows(), cfg)
}
