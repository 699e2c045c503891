//! Command-line surface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use comi_core::cost::{end_to_end_report, ModelDims};
use comi_core::lab::{Profile, TrialConfig};
use comi_core::merge::intra_group_gains;
use comi_core::metrics::{auc, redundancy_score, retention_select, LabeledScores};
use comi_core::{CompressionConfig, EmbeddingMatrix, GainRecord, RedundancyScope, Role};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::{
    load_embeddings, load_json, save_embeddings, save_json, to_json, AucReport, LabelsFile, RedundancyReport,
    ScoresFile,
};
use crate::manifest::{manifest_path, RunManifest};
use crate::parallel::Workers;

#[derive(Debug, Parser)]
#[command(name = "comi", version, about = "Marginal-information-gain context compression")]
pub struct Cli {
    /// Worker threads; 0 picks one per core. Never changes any output.
    #[arg(long, global = true, env = "COMI_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a context into one token per group.
    Compress(CompressArgs),
    /// Emit per-group and per-token gains without compressing.
    Score(ScoreArgs),
    /// Evaluate a scoring function.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Run greedy selection trials on Gaussian instances.
    Lab(LabArgs),
    /// FLOPs of compression plus generation versus the uncompressed baseline.
    Cost(CostArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scope {
    Representatives,
    AllTokens,
}

impl From<Scope> for RedundancyScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Representatives => RedundancyScope::Representatives,
            Scope::AllTokens => RedundancyScope::AllTokens,
        }
    }
}

fn scope_name(s: Scope) -> &'static str {
    match s {
        Scope::Representatives => "representatives",
        Scope::AllTokens => "all_tokens",
    }
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub context: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rate: u64,
    #[arg(long, value_enum, default_value = "representatives")]
    pub scope: Scope,
    #[arg(long = "min-group", value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    pub min_group: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub context: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    /// Group size used for the initial partition.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 32)]
    pub rate: u64,
    #[arg(long, value_enum, default_value = "representatives")]
    pub scope: Scope,
    #[arg(long = "min-group", value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    pub min_group: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// `{"auc":x}` for scores against binary labels.
    Auc {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// `{"redundancy":x,"k":n}` over the rows of an embedding file,
    /// optionally after keeping the top `ratio` rows by score.
    Redundancy {
        #[arg(long)]
        emb: PathBuf,
        #[arg(long, requires = "ratio")]
        scores: Option<PathBuf>,
        #[arg(long, requires = "scores")]
        ratio: Option<f64>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct LabArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long = "context-len")]
    pub context_len: u64,
    #[arg(long = "query-len")]
    pub query_len: u64,
    #[arg(long = "answer-len")]
    pub answer_len: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rate: u64,
    /// A preset name (`7b`) or a JSON file of model dimensions.
    #[arg(long, default_value = "7b")]
    pub dims: String,
    /// Leave the one-layer placeholder for the compressed-token transform out
    /// of the compression cost.
    #[arg(long = "exclude-lsa")]
    pub exclude_lsa: bool,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Lab config file: a [`TrialConfig`] whose seed may come from `--seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub trials: usize,
    pub n: usize,
    pub k: usize,
    pub family: Profile,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct LabReport<'a> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    report: comi_core::lab::SelectionReport,
}

/// Output of `comi score`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub sizes_before: Vec<usize>,
    pub sizes_after: Vec<usize>,
    pub group_gains: Vec<GainRecord>,
    pub token_gains: Vec<Vec<GainRecord>>,
}

fn compression_config(rate: u64, scope: Scope, min_group: u64) -> CompressionConfig {
    CompressionConfig::new(rate as usize)
        .with_scope(scope.into())
        .with_min_group_size(min_group as usize)
}

fn load_pair(context: &Path, query: &Path) -> Result<(EmbeddingMatrix, EmbeddingMatrix), CliError> {
    let h = load_embeddings(context, Some(Role::Context))?;
    let q = load_embeddings(query, Some(Role::Query))?;
    if h.cols() != q.cols() {
        return Err(CliError::invalid(format!(
            "context has {} columns but query has {}",
            h.cols(),
            q.cols()
        )));
    }
    Ok((h, q))
}

fn compress(args: &CompressArgs, workers: &Workers) -> Result<(), CliError> {
    let (h, q) = load_pair(&args.context, &args.query)?;
    let cfg = compression_config(args.rate, args.scope, args.min_group);
    let out = workers.compress(&h.to_matrix(), &q.to_matrix(), &cfg)?;
    let tokens = EmbeddingMatrix::from_matrix(Role::Compressed, &out.tokens)?;
    save_embeddings(&args.out, &tokens)?;
    if let Some(trace) = &args.trace {
        save_json(trace, &out.trace())?;
    }
    let manifest = RunManifest::new("compress")
        .flag("context", &args.context)
        .flag("query", &args.query)
        .flag("rate", args.rate)
        .flag("scope", scope_name(args.scope))
        .flag("min_group", args.min_group)
        .flag("out", &args.out)
        .flag("trace", &args.trace)
        .input(&args.context)?
        .input(&args.query)?;
    save_json(&manifest_path(&args.out), &manifest)
}

fn score(args: &ScoreArgs, workers: &Workers) -> Result<(), CliError> {
    let (h, q) = load_pair(&args.context, &args.query)?;
    let cfg = compression_config(args.rate, args.scope, args.min_group);
    let h = h.to_matrix();
    let qbar = comi_core::merge::prepare(&h, &q.to_matrix(), &cfg)?;
    let reallocation = workers.reallocate(&h, &qbar, &cfg)?;
    let token_gains = reallocation
        .after
        .ranges()
        .into_iter()
        .map(|r| {
            let mut gains = intra_group_gains(&h.slice_rows(r.start, r.end), &qbar)?;
            for g in gains.iter_mut() {
                g.index += r.start;
                g.argmax_peer = g.argmax_peer.map(|p| p + r.start);
            }
            Ok(gains)
        })
        .collect::<comi_core::Result<Vec<_>>>()?;
    let report = ScoreReport {
        sizes_before: reallocation.before.sizes().to_vec(),
        sizes_after: reallocation.after.sizes().to_vec(),
        group_gains: reallocation.gains,
        token_gains,
    };
    save_json(&args.out, &report)?;
    let manifest = RunManifest::new("score")
        .flag("context", &args.context)
        .flag("query", &args.query)
        .flag("rate", args.rate)
        .flag("scope", scope_name(args.scope))
        .flag("min_group", args.min_group)
        .flag("out", &args.out)
        .input(&args.context)?
        .input(&args.query)?;
    save_json(&manifest_path(&args.out), &manifest)
}

fn emit(json: String, manifest: Option<(&Path, RunManifest)>) -> Result<(), CliError> {
    println!("{json}");
    if let Some((path, m)) = manifest {
        save_json(path, &m)?;
    }
    Ok(())
}

fn eval(cmd: &EvalCommand) -> Result<(), CliError> {
    match cmd {
        EvalCommand::Auc {
            scores,
            labels,
            manifest,
        } => {
            let s = load_json::<ScoresFile>(scores)?.into_vec();
            let l = load_json::<LabelsFile>(labels)?.labels;
            let value = auc(&LabeledScores::new(s, l)?)?;
            let json = serde_json::to_string(&AucReport { auc: value }).expect("serializable");
            let m = match manifest {
                Some(p) => Some((
                    p.as_path(),
                    RunManifest::new("eval auc")
                        .flag("scores", scores)
                        .flag("labels", labels)
                        .input(scores)?
                        .input(labels)?,
                )),
                None => None,
            };
            emit(json, m)
        }
        EvalCommand::Redundancy {
            emb,
            scores,
            ratio,
            manifest,
        } => {
            let e = load_embeddings(emb, None)?.to_matrix();
            let kept = match (scores, ratio) {
                (Some(path), Some(ratio)) => {
                    let s = load_json::<ScoresFile>(path)?.into_vec();
                    if s.len() != e.rows() {
                        return Err(CliError::invalid(format!(
                            "{} scores for {} rows",
                            s.len(),
                            e.rows()
                        )));
                    }
                    e.select_rows(&retention_select(&s, *ratio)?)
                }
                _ => e,
            };
            let report = RedundancyReport {
                redundancy: redundancy_score(&kept),
                k: kept.rows(),
            };
            let json = serde_json::to_string(&report).expect("serializable");
            let m = match manifest {
                Some(p) => {
                    let mut m = RunManifest::new("eval redundancy")
                        .flag("emb", emb)
                        .flag("scores", scores)
                        .flag("ratio", ratio)
                        .input(emb)?;
                    if let Some(s) = scores {
                        m = m.input(s)?;
                    }
                    Some((p.as_path(), m))
                }
                None => None,
            };
            emit(json, m)
        }
    }
}

fn lab(args: &LabArgs, workers: &Workers) -> Result<(), CliError> {
    let config: LabConfig = load_json(&args.config)?;
    let seed = args
        .seed
        .or(config.seed)
        .ok_or_else(|| CliError::invalid("no seed: pass --seed or set \"seed\" in the config"))?;
    let cfg = TrialConfig {
        trials: config.trials,
        n: config.n,
        k: config.k,
        family: config.family,
        seed,
    };
    let report = workers.run_trials(&cfg)?;
    let manifest = RunManifest::new("lab")
        .flag("config", &args.config)
        .flag("seed", args.seed)
        .flag("out", &args.out)
        .input(&args.config)?
        .seed(seed);
    save_json(&args.out, &LabReport { manifest: &manifest, report })
}

fn cost(args: &CostArgs) -> Result<(), CliError> {
    let dims = match ModelDims::preset(&args.dims) {
        Some(d) => d,
        None => {
            let path = Path::new(&args.dims);
            if !path.exists() {
                return Err(CliError::invalid(format!(
                    "--dims: {} is neither a preset (7b) nor a file",
                    args.dims
                )));
            }
            load_json(path)?
        }
    };
    let report = end_to_end_report(
        args.context_len,
        args.query_len,
        args.answer_len,
        args.rate,
        &dims,
        !args.exclude_lsa,
    )?;
    let m = match &args.manifest {
        Some(p) => {
            let mut m = RunManifest::new("cost")
                .flag("context_len", args.context_len)
                .flag("query_len", args.query_len)
                .flag("answer_len", args.answer_len)
                .flag("rate", args.rate)
                .flag("dims", &args.dims)
                .flag("exclude_lsa", args.exclude_lsa);
            if ModelDims::preset(&args.dims).is_none() {
                m = m.input(Path::new(&args.dims))?;
            }
            Some((p.as_path(), m))
        }
        None => None,
    };
    emit(to_json(&report).trim_end().to_string(), m)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let workers = Workers::new(cli.threads)?;
    match &cli.command {
        Command::Compress(a) => compress(a, &workers),
        Command::Score(a) => score(a, &workers),
        Command::Eval(c) => eval(c),
        Command::Lab(a) => lab(a, &workers),
        Command::Cost(a) => cost(a),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
