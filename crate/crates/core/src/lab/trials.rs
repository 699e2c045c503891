use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::greedy::{greedy_select, greedy_true_mi, Strategy};
use super::instance::{gen_instance_with, Profile};
use super::oracle::{brute_force_best, gaussian_mi, is_submodular, BRUTE_FORCE_MAX_N, SUBMODULARITY_MAX_N};
use crate::error::{Error, Result};

/// Two strategies whose MI differs by no more than this are tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub n: usize,
    pub k: usize,
    pub family: Profile,
    pub seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1"));
        }
        if self.k < 1 || self.k > self.n {
            return Err(Error::InvalidConfig("k must be between 1 and n"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Features in pick order.
    pub features: Vec<usize>,
    pub mi: f64,
}

impl Selection {
    fn score(features: Vec<usize>, inst: &super::GaussianInstance) -> Result<Self> {
        let mi = gaussian_mi(&features, inst)?;
        Ok(Selection { features, mi })
    }

    fn same_set(&self, other: &Selection) -> bool {
        let mut a = self.features.clone();
        let mut b = other.features.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    MigWins,
    Tie,
    RelevanceWins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub relevance: Selection,
    pub mig: Selection,
    /// Present when `n` is within the enumeration bound.
    pub optimum: Option<Selection>,
    /// Greedy on the exact MI marginal gain.
    pub true_greedy: Selection,
    /// Whether MI is submodular on this instance; checked for small `n`.
    pub submodular: Option<bool>,
    pub strategies_differ: bool,
    pub outcome: Outcome,
    pub projected: bool,
}

/// One trial. The instance is drawn from a ChaCha stream keyed by
/// `(cfg.seed, trial)`, so trials can run in any order.
pub fn run_trial(cfg: &TrialConfig, trial: usize) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let inst = gen_instance_with(cfg.n, &cfg.family, &mut rng)?;
    let relevance = Selection::score(greedy_select(Strategy::Relevance, cfg.k, &inst)?, &inst)?;
    let mig = Selection::score(greedy_select(Strategy::Mig, cfg.k, &inst)?, &inst)?;
    let true_greedy = Selection::score(greedy_true_mi(cfg.k, &inst)?, &inst)?;
    let optimum = if cfg.n <= BRUTE_FORCE_MAX_N {
        Some(Selection::score(brute_force_best(cfg.k, &inst)?, &inst)?)
    } else {
        None
    };
    let submodular = if cfg.n <= SUBMODULARITY_MAX_N {
        is_submodular(&inst).ok()
    } else {
        None
    };
    let outcome = if mig.mi > relevance.mi + TIE_TOLERANCE {
        Outcome::MigWins
    } else if relevance.mi > mig.mi + TIE_TOLERANCE {
        Outcome::RelevanceWins
    } else {
        Outcome::Tie
    };
    Ok(TrialRecord {
        trial,
        strategies_differ: !relevance.same_set(&mig),
        relevance,
        mig,
        optimum,
        true_greedy,
        submodular,
        outcome,
        projected: inst.projected(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub mig_wins: usize,
    pub ties: usize,
    pub relevance_wins: usize,
    /// Trials where the two strategies selected different sets.
    pub differing: usize,
    pub mig_wins_when_differing: usize,
    /// `mig_wins_when_differing / differing`; absent when no trial differs.
    pub mig_win_rate_when_differing: Option<f64>,
    pub mig_win_rate: f64,
    pub mean_mi_relevance: f64,
    pub mean_mi_mig: f64,
    /// Mean of `mi(mig) - mi(relevance)`.
    pub mean_mi_gap: f64,
    pub mean_mi_relevance_bits: f64,
    pub mean_mi_mig_bits: f64,
    pub mean_mi_gap_bits: f64,
    pub mean_ratio_relevance: Option<f64>,
    pub mean_ratio_mig: Option<f64>,
    pub mean_ratio_true_greedy: Option<f64>,
    /// Instances on which MI was verified submodular.
    pub submodular_instances: usize,
    /// Worst true-greedy ratio to the optimum over submodular instances.
    pub min_ratio_true_greedy_submodular: Option<f64>,
    pub min_ratio_mig_submodular: Option<f64>,
    pub greedy_bound: f64,
    pub projected_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub config: TrialConfig,
    pub summary: Summary,
    pub records: Vec<TrialRecord>,
}

fn ratio(value: f64, optimum: f64) -> f64 {
    if optimum <= 0.0 {
        1.0
    } else {
        value / optimum
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates trial records, which must be in trial order.
pub fn summarize(cfg: &TrialConfig, records: Vec<TrialRecord>) -> SelectionReport {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
    let differing = records.iter().filter(|r| r.strategies_differ).count();
    let mig_wins_when_differing = records
        .iter()
        .filter(|r| r.strategies_differ && r.outcome == Outcome::MigWins)
        .count();
    let trials = records.len();
    let mean_mi_relevance = mean(records.iter().map(|r| r.relevance.mi)).unwrap_or(0.0);
    let mean_mi_mig = mean(records.iter().map(|r| r.mig.mi)).unwrap_or(0.0);
    let mean_mi_gap = mean(records.iter().map(|r| r.mig.mi - r.relevance.mi)).unwrap_or(0.0);
    let with_opt = || records.iter().filter_map(|r| r.optimum.as_ref().map(|o| (r, o.mi)));
    let submodular = || {
        records
            .iter()
            .filter(|r| r.submodular == Some(true))
            .filter_map(|r| r.optimum.as_ref().map(|o| (r, o.mi)))
    };
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let mig_wins = count(Outcome::MigWins);
    let summary = Summary {
        trials,
        mig_wins,
        ties: count(Outcome::Tie),
        relevance_wins: count(Outcome::RelevanceWins),
        differing,
        mig_wins_when_differing,
        mig_win_rate_when_differing: (differing > 0).then(|| mig_wins_when_differing as f64 / differing as f64),
        mig_win_rate: mig_wins as f64 / trials.max(1) as f64,
        mean_mi_relevance,
        mean_mi_mig,
        mean_mi_gap,
        mean_mi_relevance_bits: mean_mi_relevance / core::f64::consts::LN_2,
        mean_mi_mig_bits: mean_mi_mig / core::f64::consts::LN_2,
        mean_mi_gap_bits: mean_mi_gap / core::f64::consts::LN_2,
        mean_ratio_relevance: mean(with_opt().map(|(r, o)| ratio(r.relevance.mi, o))),
        mean_ratio_mig: mean(with_opt().map(|(r, o)| ratio(r.mig.mi, o))),
        mean_ratio_true_greedy: mean(with_opt().map(|(r, o)| ratio(r.true_greedy.mi, o))),
        submodular_instances: records.iter().filter(|r| r.submodular == Some(true)).count(),
        min_ratio_true_greedy_submodular: min(&mut submodular().map(|(r, o)| ratio(r.true_greedy.mi, o))),
        min_ratio_mig_submodular: min(&mut submodular().map(|(r, o)| ratio(r.mig.mi, o))),
        greedy_bound: 1.0 - 1.0 / core::f64::consts::E,
        projected_instances: records.iter().filter(|r| r.projected).count(),
    };
    SelectionReport {
        config: cfg.clone(),
        summary,
        records,
    }
}

/// Runs all trials sequentially.
pub fn run_trials(cfg: &TrialConfig) -> Result<SelectionReport> {
    cfg.validate()?;
    let records = (0..cfg.trials)
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(cfg, records))
}
