//! Multi-threaded drivers. Work is split along independent units (groups,
//! trials) and collected in index order, so results are bit-identical to
//! the sequential kernel for any thread count.

use comi_core::lab::{run_trial, summarize, SelectionReport, TrialConfig};
use comi_core::merge::{self, CompressedContext, GroupMerge};
use comi_core::realloc::{self, finish_reallocation, initial_partition, Reallocation};
use comi_core::{CompressionConfig, GainRecord, Matrix, PooledQuery, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::CliError;

pub struct Workers {
    pool: ThreadPool,
}

impl Workers {
    /// `threads == 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
        Ok(Workers { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn group_gains(&self, h: &Matrix, qbar: &PooledQuery, cfg: &CompressionConfig) -> Result<Vec<GainRecord>> {
        let part = initial_partition(h.rows(), cfg)?;
        self.gains_for(h, &part, qbar, cfg)
    }

    fn gains_for(
        &self,
        h: &Matrix,
        part: &comi_core::GroupPartition,
        qbar: &PooledQuery,
        cfg: &CompressionConfig,
    ) -> Result<Vec<GainRecord>> {
        self.pool.install(|| {
            let reps = part
                .ranges()
                .into_par_iter()
                .map(|r| comi_core::mig::representative(h, r.start, r.end, qbar))
                .collect::<Result<Vec<_>>>()?;
            (0..part.len())
                .into_par_iter()
                .map(|g| realloc::group_gain(h, part, &reps, g, qbar, cfg.redundancy_scope))
                .collect()
        })
    }

    pub fn reallocate(&self, h: &Matrix, qbar: &PooledQuery, cfg: &CompressionConfig) -> Result<Reallocation> {
        let before = initial_partition(h.rows(), cfg)?;
        let gains = self.gains_for(h, &before, qbar, cfg)?;
        finish_reallocation(before, gains, h.rows(), cfg)
    }

    /// Same result as [`comi_core::compress`].
    pub fn compress(&self, h: &Matrix, q: &Matrix, cfg: &CompressionConfig) -> Result<CompressedContext> {
        let qbar = merge::prepare(h, q, cfg)?;
        let reallocation = self.reallocate(h, &qbar, cfg)?;
        let groups: Vec<GroupMerge> = self.pool.install(|| {
            reallocation
                .after
                .ranges()
                .into_par_iter()
                .map(|r| merge::merge_segment(h, r.start, r.end, &qbar))
                .collect::<Result<_>>()
        })?;
        merge::assemble(reallocation, groups, h.cols())
    }

    /// Same result as [`comi_core::lab::run_trials`].
    pub fn run_trials(&self, cfg: &TrialConfig) -> Result<SelectionReport> {
        cfg.validate()?;
        let records = self
            .pool
            .install(|| (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<Vec<_>>>())?;
        Ok(summarize(cfg, records))
    }
}
