//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

mod oracles;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use comi::Workers;
use comi_core::cost::{compression_flops, end_to_end_report, generation_flops, ModelDims};
use comi_core::lab::{
    brute_force_best, gaussian_mi, gen_instance, greedy_select, GaussianInstance, InstanceSpec, Profile, Strategy,
    TrialConfig,
};
use comi_core::merge::merge_group;
use comi_core::metrics::{auc, redundancy_score, retention_select, LabeledScores};
use comi_core::mig::mig_scores_all;
use comi_core::realloc::{allocate_sizes, allocation_weights, initial_partition};
use comi_core::{compress, CompressionConfig, Matrix, PooledQuery, RedundancyScope};
use oracles::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, (0..rows * cols).map(|_| StandardNormal.sample(r)).collect()).unwrap()
}

fn gvec(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(r)).collect()
}

fn within_time(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    ensure!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
    Ok(format!("{detail}; {elapsed:.2?}"))
}

fn case_study_table() -> Outcome {
    let gains = [0.2227, 0.0078, -0.1719, -0.4546, -0.5583, -0.3682, -0.3203, -0.2832];
    let cfg = CompressionConfig::new(32);
    let start = Instant::now();
    let part = allocate_sizes(&gains, 233, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(part.sizes() == [18, 22, 26, 35, 39, 32, 31, 30], "sizes {:?}", part.sizes());
    within_time(elapsed, Duration::from_millis(1), format!("sizes {:?}", part.sizes()))
}

fn initial_partition_256() -> Outcome {
    let part = initial_partition(256, &CompressionConfig::new(32)).map_err(|e| e.to_string())?;
    ensure!(part.sizes() == [32; 8], "sizes {:?}", part.sizes());
    Ok("8 groups of 32".into())
}

fn mig_brute_force() -> Outcome {
    let mut r = rng(200);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let l = r.random_range(1..=64);
        let d = r.random_range(1..=32);
        let x = gaussian(&mut r, l, d);
        let q = gvec(&mut r, d);
        let got = mig_scores_all(&x, &PooledQuery::from_vector(q.clone())).map_err(|e| e.to_string())?;
        for (g, (rel, red, gain)) in got.iter().zip(mig_double_loop(&x, &q)) {
            let err = (g.relevance - rel).abs().max((g.redundancy - red).abs()).max((g.gain - gain).abs());
            worst = worst.max(err);
            ensure!(err <= 1e-12, "instance {case}: error {err:e}");
        }
    }
    Ok(format!("200 instances, max error {worst:.1e}"))
}

fn pipeline_properties() -> Outcome {
    let start = Instant::now();
    let mut r = rng(500);
    let pools: Vec<Workers> = [1, 2, 4, 7].iter().map(|&t| Workers::new(t).unwrap()).collect();
    for case in 0..500 {
        let l = r.random_range(1..=200);
        let d = r.random_range(1..=32);
        let rate = r.random_range(1..=40);
        let scope = if r.random::<bool>() {
            RedundancyScope::AllTokens
        } else {
            RedundancyScope::Representatives
        };
        let h = gaussian(&mut r, l, d);
        let lq = r.random_range(1..=8);
        let q = gaussian(&mut r, lq, d);
        let cfg = CompressionConfig::new(rate).with_scope(scope);
        let out = compress(&h, &q, &cfg).map_err(|e| format!("case {case}: {e}"))?;

        ensure!(out.reallocation.after.total() == l, "case {case}: sizes sum {}", out.reallocation.after.total());
        ensure!(out.tokens.rows() == (l / rate).max(1), "case {case}: {} rows", out.tokens.rows());

        for (g, range) in out.groups.iter().zip(out.reallocation.after.ranges()) {
            ensure!(g.weights.iter().all(|&w| w > 0.0), "case {case}: non-positive weight");
            ensure!((g.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "case {case}: weights do not sum to 1");
            for c in 0..d {
                let combo: f64 = range.clone().zip(&g.weights).map(|(i, w)| w * h.get(i, c)).sum();
                ensure!((combo - g.token[c]).abs() <= 1e-12, "case {case}: token is not the weighted sum");
                let lo = range.clone().map(|i| h.get(i, c)).fold(f64::INFINITY, f64::min);
                let hi = range.clone().map(|i| h.get(i, c)).fold(f64::NEG_INFINITY, f64::max);
                ensure!(g.token[c] >= lo - 1e-12 && g.token[c] <= hi + 1e-12, "case {case}: outside hull");
            }
        }

        let shift = r.random_range(-3.0..3.0);
        let gains: Vec<f64> = out.reallocation.gains.iter().map(|g| g.gain).collect();
        let shifted: Vec<f64> = gains.iter().map(|g| g + shift).collect();
        let (a, b) = (allocation_weights(&gains).unwrap(), allocation_weights(&shifted).unwrap());
        ensure!(
            a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| (x - y).abs() <= 1e-12),
            "case {case}: allocation weights moved under shift"
        );
        let first = out.reallocation.after.ranges()[0].clone();
        let group = h.slice_rows(first.start, first.end);
        let intra: Vec<f64> = out.groups[0].gains.iter().map(|g| g.gain).collect();
        let moved: Vec<f64> = intra.iter().map(|g| g + shift).collect();
        let (ta, tb) = (merge_group(&group, &intra).unwrap(), merge_group(&group, &moved).unwrap());
        ensure!(ta.iter().zip(&tb).all(|(x, y)| (x - y).abs() <= 1e-12), "case {case}: merge moved under shift");

        let qbar = comi_core::pool_query(&q).unwrap();
        let mut scaled = h.clone();
        for i in 0..l {
            let s = r.random_range(0.01..100.0);
            scaled.row_mut(i).iter_mut().for_each(|v| *v *= s);
        }
        let before = mig_scores_all(&h, &qbar).unwrap();
        let after = mig_scores_all(&scaled, &qbar).unwrap();
        for (x, y) in before.iter().zip(&after) {
            ensure!(
                (x.relevance - y.relevance).abs() <= 1e-12
                    && (x.redundancy - y.redundancy).abs() <= 1e-12
                    && (x.gain - y.gain).abs() <= 1e-12,
                "case {case}: rescaling changed a score"
            );
        }

        let bits: Vec<u64> = out.tokens.as_slice().iter().map(|v| v.to_bits()).collect();
        let trace = out.trace();
        for w in &pools {
            let par = w.compress(&h, &q, &cfg).unwrap();
            ensure!(
                par.tokens.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>() == bits && par.trace() == trace,
                "case {case}: {} threads differ",
                w.threads()
            );
        }
    }
    within_time(start.elapsed(), Duration::from_secs(30), "500 cases, threads 1/2/4/7 bit-identical".into())
}

fn redundant_top_direction() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/redundant_top.json");
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let cfg: comi::cli::LabConfig = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let cfg = TrialConfig {
        trials: cfg.trials,
        n: cfg.n,
        k: cfg.k,
        family: cfg.family,
        seed: cfg.seed.unwrap_or(0),
    };
    ensure!(cfg.trials == 1000, "shipped config runs {} trials", cfg.trials);
    let top = match cfg.family {
        Profile::RedundantTop { top, .. } => top,
        _ => return Err("shipped config is not redundant_top".into()),
    };
    let start = Instant::now();
    let report = Workers::new(0).unwrap().run_trials(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    // the top-relevant features are pairwise correlated at 0.8 or more
    for trial in 0..20 {
        let mut r = rng(cfg.seed);
        r.set_stream(trial);
        let inst = comi_core::lab::gen_instance_with(cfg.n, &cfg.family, &mut r).unwrap();
        let mut by_rel: Vec<usize> = (0..cfg.n).collect();
        by_rel.sort_by(|&a, &b| inst.relevance(b).total_cmp(&inst.relevance(a)));
        for &a in &by_rel[..top] {
            for &b in &by_rel[..top] {
                ensure!(a == b || inst.corr().get(a, b) >= 0.8, "trial {trial}: top pair below 0.8");
            }
        }
    }

    let s = &report.summary;
    ensure!(s.mean_mi_mig >= s.mean_mi_relevance, "mean MI mig {} < relevance {}", s.mean_mi_mig, s.mean_mi_relevance);
    let rate = s.mig_win_rate_when_differing.ok_or("strategies never differ")?;
    ensure!(rate >= 0.95, "MIG wins {rate:.3} of differing trials");
    within_time(
        elapsed,
        Duration::from_secs(60),
        format!(
            "mean MI {:.4} vs {:.4} nats, MIG wins {}/{} differing trials",
            s.mean_mi_mig, s.mean_mi_relevance, s.mig_wins_when_differing, s.differing
        ),
    )
}

fn gram(n: usize, seed: u64) -> GaussianInstance {
    gen_instance(&InstanceSpec {
        n,
        profile: Profile::RandomGram { dim: n + 2 },
        seed,
    })
    .unwrap()
}

fn mi_oracle() -> Outcome {
    let single = GaussianInstance::from_correlation(Matrix::from_rows(&[[1.0, 0.6], [0.6, 1.0]]).unwrap()).unwrap();
    let v = gaussian_mi(&[0], &single).map_err(|e| e.to_string())?;
    ensure!((v - 0.2231435513).abs() <= 1e-9, "single feature {v}");

    let mut r = rng(66);
    for t in 0..100 {
        let n = r.random_range(2..=8);
        let inst = gram(n, 10_000 + t);
        for mask in 0u32..1 << n {
            let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let base = gaussian_mi(&set, &inst).map_err(|e| e.to_string())?;
            for i in (0..n).filter(|i| mask & (1 << i) == 0) {
                let mut bigger = set.clone();
                bigger.push(i);
                ensure!(gaussian_mi(&bigger, &inst).unwrap() >= base - 1e-12, "instance {t}: not monotone");
            }
        }
    }

    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let inst = gram(5, 700 + seed);
        let set: Vec<usize> = (0..=(seed as usize % 4)).collect();
        let exact = gaussian_mi(&set, &inst).unwrap();
        let mc = monte_carlo_mi(&set, &inst, 1_000_000, seed);
        worst = worst.max((exact - mc).abs());
        ensure!((exact - mc).abs() < 0.01, "instance {seed}: {exact} vs Monte-Carlo {mc}");
    }
    Ok(format!("closed form {v:.10}; monotone on 100 instances; Monte-Carlo max gap {worst:.4} nats"))
}

fn optimum_dominates() -> Outcome {
    let mut r = rng(12);
    for t in 0..100 {
        let n = r.random_range(2..=12);
        let k = r.random_range(1..=n);
        let inst = gram(n, 20_000 + t);
        let best = gaussian_mi(&brute_force_best(k, &inst).map_err(|e| e.to_string())?, &inst).unwrap();
        ensure!((best - bitmask_best(k, &inst)).abs() < 1e-9, "instance {t}: optimum disagrees with enumerator");
        for s in [Strategy::Relevance, Strategy::Mig] {
            let g = gaussian_mi(&greedy_select(s, k, &inst).unwrap(), &inst).unwrap();
            ensure!(best >= g, "instance {t}: {s:?} beats the optimum");
        }
    }
    Ok("100 instances, n <= 12".into())
}

fn clustered_corpus(seed: u64) -> (Matrix, Vec<f64>) {
    let mut r = rng(seed);
    let d = 32;
    let mut q = vec![0.0; d];
    q[0] = 1.0;
    let mut rows = Vec::new();
    for k in 0..3 {
        let mut centre = vec![0.0; d];
        centre[0] = 0.8;
        centre[1 + k] = 0.6;
        for _ in 0..6 {
            let noise = gvec(&mut r, d);
            rows.push(centre.iter().zip(&noise).map(|(c, n)| c + 0.03 * n).collect::<Vec<f64>>());
        }
    }
    for _ in 0..22 {
        let mut v = gvec(&mut r, d);
        v[0] = 0.0;
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x *= 0.9 / n);
        v[0] = 0.4 + 0.1 * r.random::<f64>();
        rows.push(v);
    }
    (Matrix::from_rows(&rows).unwrap(), q)
}

fn metrics() -> Outcome {
    let mut r = rng(1000);
    for t in 0..1000 {
        let n = r.random_range(2..60);
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..8) as f64 / 4.0).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        labels[0] = 1;
        labels[1] = 0;
        let got = auc(&LabeledScores::new(scores.clone(), labels.clone()).unwrap()).unwrap();
        ensure!((got - pairwise_auc(&scores, &labels)).abs() <= 1e-12, "AUC set {t}");
    }

    let m = |rows: &[&[f64]]| Matrix::from_rows(rows).unwrap();
    ensure!(redundancy_score(&m(&[&[0.3, 0.4]])) == 0.0, "single row");
    ensure!((redundancy_score(&m(&[&[0.3, 0.4], &[0.3, 0.4]])) - 1.0).abs() < 1e-15, "identical pair");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let three = redundancy_score(&m(&[&[1.0, 0.0], &[0.0, 1.0], &[h, h]]));
    ensure!((three - 0.47140452).abs() <= 1e-8, "three vectors {three}");

    let mut wins = Vec::new();
    for ratio in [0.25, 0.5] {
        let mut better = 0;
        for seed in 0..50 {
            let (e, q) = clustered_corpus(seed);
            let relevance: Vec<f64> = (0..e.rows()).map(|i| cos(e.row(i), &q)).collect();
            let mig: Vec<f64> = mig_scores_all(&e, &PooledQuery::from_vector(q)).unwrap().iter().map(|g| g.gain).collect();
            let by_rel = redundancy_score(&e.select_rows(&retention_select(&relevance, ratio).unwrap()));
            let by_mig = redundancy_score(&e.select_rows(&retention_select(&mig, ratio).unwrap()));
            if by_mig < by_rel {
                better += 1;
            }
        }
        ensure!(better >= 45, "ratio {ratio}: MIG less redundant on {better}/50 corpora");
        wins.push(format!("{ratio}: {better}/50"));
    }
    Ok(format!("1000 AUC sets; fixtures; MIG retention less redundant ({})", wins.join(", ")))
}

fn naive_generation(prompt: usize, answer: usize, dims: &ModelDims) -> Vec<u128> {
    let d = dims.d_model as usize;
    let token = |s: usize| -> Vec<f64> { (0..d).map(|c| ((s * 5 + c) % 4) as f64 - 1.5).collect() };
    let mut c = Counter::default();
    let mut cache: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = vec![(Vec::new(), Vec::new()); dims.layers as usize];
    let step = |c: &mut Counter, x: &[f64], (keys, values): &mut (Vec<Vec<f64>>, Vec<Vec<f64>>)| {
        let q = c.matvec(x, d);
        let k = c.matvec(x, d);
        let v = c.matvec(x, d);
        let mut mixed = vec![0.0; d];
        for (kj, vj) in keys.iter().zip(values.iter()) {
            let score = c.dot(&q, kj);
            for (m, val) in mixed.iter_mut().zip(vj) {
                *m = c.mac(*m, score, *val);
            }
        }
        let o = c.matvec(&mixed, d);
        let hidden = c.matvec(&o, dims.d_ff as usize);
        let _ = c.matvec(&hidden, d);
        keys.push(k);
        values.push(v);
    };
    let mut steps = Vec::new();
    for j in 0..prompt {
        for layer in cache.iter_mut() {
            step(&mut c, &token(j), layer);
        }
    }
    if prompt > 0 {
        let _ = c.matvec(&token(0), dims.vocab as usize);
    }
    steps.push(c.flops);
    for i in 0..answer {
        let before = c.flops;
        for layer in cache.iter_mut() {
            step(&mut c, &token(prompt + i), layer);
        }
        let _ = c.matvec(&token(i), dims.vocab as usize);
        steps.push(c.flops - before);
    }
    steps
}

fn naive_compression(context: usize, query: usize, rate: usize, d: usize) -> u128 {
    let token = |s: usize| -> Vec<f64> { (0..d).map(|c| ((s * 3 + c) % 5) as f64 - 2.0).collect() };
    let mut c = Counter::default();
    let mut qbar = vec![0.0; d];
    for i in 0..query {
        for (a, v) in qbar.iter_mut().zip(token(i)) {
            *a = c.add(*a, v);
        }
    }
    let m = (context / rate).max(1);
    let sizes: Vec<usize> = (0..m).map(|g| context / m + usize::from(g < context % m)).collect();
    let mut reps = Vec::new();
    let mut start = 0;
    for &s in &sizes {
        let mut best = (start, f64::NEG_INFINITY);
        for i in start..start + s {
            let v = c.dot(&token(i), &qbar);
            if v > best.1 {
                best = (i, v);
            }
        }
        reps.push(best.0);
        start += s;
    }
    for &a in &reps {
        for &b in &reps {
            if a != b {
                c.dot(&token(a), &token(b));
            }
        }
    }
    // charged comparisons for ordering the remainders: m * ceil(log2 m)
    let mut bits = 0u128;
    while (1usize << bits) < m {
        bits += 1;
    }
    c.flops += m as u128 * bits;
    let mut start = 0;
    for &s in &sizes {
        for i in start..start + s {
            c.dot(&token(i), &qbar);
            for j in (start..start + s).filter(|&j| j != i) {
                c.dot(&token(i), &token(j));
            }
        }
        let mut merged = vec![0.0; d];
        for i in start..start + s {
            for (m, v) in merged.iter_mut().zip(token(i)) {
                *m = c.mac(*m, 0.25, v);
            }
        }
        start += s;
    }
    c.flops
}

fn cost_model() -> Outcome {
    let toy = ModelDims {
        layers: 1,
        d_model: 4,
        d_ff: 8,
        n_heads: 2,
        vocab: 10,
    };
    for (prompt, answer) in [(1, 0), (6, 3), (20, 5), (0, 0)] {
        let got = generation_flops(prompt as u64, 0, answer as u64, &toy).map_err(|e| e.to_string())?;
        ensure!(got.steps == naive_generation(prompt, answer, &toy), "generation prompt {prompt} answer {answer}");
    }
    for (context, query, rate) in [(64, 4, 8), (37, 3, 5), (1, 1, 32), (256, 8, 32)] {
        let got = compression_flops(context as u64, query as u64, rate as u64, &toy, false).unwrap();
        ensure!(got.total() == naive_compression(context, query, rate, 4), "compression L={context}");
    }
    let report = end_to_end_report(8192, 64, 128, 32, &ModelDims::PRESET_7B, true).map_err(|e| e.to_string())?;
    ensure!(report.speedup_ratio > 2.0, "7b speedup {}", report.speedup_ratio);
    Ok(format!("toy counts exact; 7b speedup {:.2}x", report.speedup_ratio))
}

fn benchmark_tables() -> Outcome {
    Ok("not reproducible at desk scale; no criterion depends on them; suite ran without the exporter".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("case-study reallocation table", case_study_table),
        ("initial partition 256/32", initial_partition_256),
        ("MIG brute-force equivalence", mig_brute_force),
        ("pipeline property suite", pipeline_properties),
        ("redundant-top selection direction", redundant_top_direction),
        ("Gaussian MI oracle", mi_oracle),
        ("brute-force dominance", optimum_dominates),
        ("metrics", metrics),
        ("cost model", cost_model),
        ("benchmark tables out of scope", benchmark_tables),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
