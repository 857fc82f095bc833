//! Multi-trial benchmark runs and their summaries.

use rayon::prelude::*;

use super::problems::Problem;
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
use crate::error::{Error, Result};
use crate::netcore::Network;
use crate::optim::{train, Algorithm, OptimizerConfig};

/// Outcome of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub problem: String,
    pub algorithm: Algorithm,
    pub trial: usize,
    /// Seed of the weight initialization and the optimizer stream.
    pub seed: u64,
    pub epochs: u64,
    pub converged: bool,
    /// Percentage of correctly classified scoring patterns.
    pub generalization: f64,
    pub final_energy: f64,
}

/// `convergence * generalization / 100`, both in percent.
pub fn performance(convergence_pct: f64, generalization_pct: f64) -> Result<f64> {
    for (name, v) in [
        ("convergence", convergence_pct),
        ("generalization", generalization_pct),
    ] {
        if !(0.0..=100.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in [0, 100], got {v}"
            )));
        }
    }
    Ok(convergence_pct * generalization_pct / 100.0)
}

/// Runs one trial of `cfg` on `problem`.
pub fn run_trial(
    problem: &Problem,
    cfg: &OptimizerConfig,
    trial: usize,
    seed: u64,
) -> Result<TrialResult> {
    let net = Network::init_weights(problem.topology.clone(), seed, problem.init_range)?;
    let (train_set, score_set) = problem.evaluation.for_trial(trial);
    let (trained, report) = train(&net, train_set, cfg, seed)?;
    let generalization = if report.abort.is_some() {
        0.0
    } else {
        trained.classify(score_set)?
    };
    Ok(TrialResult {
        problem: problem.name.clone(),
        algorithm: cfg.algorithm,
        trial,
        seed,
        epochs: report.epochs_run,
        converged: report.converged,
        generalization,
        final_energy: report.final_energy,
    })
}

/// Runs `n_trials` trials of every configuration.
///
/// Trial `t` initializes its network from seed `base_seed + t` for every
/// configuration, so all algorithms start from the same weights. Results
/// are ordered by trial, then by the order of `configs`, and do not depend
/// on `jobs` (the worker count; `None` uses rayon's default pool).
pub fn run_benchmark(
    problem: &Problem,
    configs: &[OptimizerConfig],
    n_trials: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<TrialResult>> {
    if n_trials == 0 {
        return Err(Error::InvalidParameter(
            "n_trials must be at least 1".into(),
        ));
    }
    if configs.is_empty() {
        return Err(Error::InvalidParameter("no algorithms requested".into()));
    }
    for c in configs {
        c.validate()?;
    }
    let jobs_list: Vec<(usize, usize)> = (0..n_trials)
        .flat_map(|t| (0..configs.len()).map(move |c| (t, c)))
        .collect();
    let run = || {
        jobs_list
            .par_iter()
            .map(|&(t, c)| run_trial(problem, &configs[c], t, base_seed.wrapping_add(t as u64)))
            .collect::<Result<Vec<_>>>()
    };
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Significance of an algorithm's difference from the reference algorithm,
/// one Wilcoxon test per metric. `None` means too few informative pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Marks {
    pub epochs: Option<WilcoxonResult>,
    pub generalization: Option<WilcoxonResult>,
    pub convergence: Option<WilcoxonResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub converged: usize,
    pub convergence_pct: f64,
    /// Mean over converged trials only.
    pub mean_epochs: Option<f64>,
    /// Mean over converged trials only.
    pub mean_generalization: Option<f64>,
    pub performance: f64,
    /// Comparison against the reference; `None` for the reference itself.
    pub marks: Option<Marks>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSummary {
    pub problem: String,
    pub reference: Algorithm,
    pub rows: Vec<AlgorithmSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn by_algorithm(results: &[TrialResult], alg: Algorithm) -> Vec<&TrialResult> {
    let mut rows: Vec<&TrialResult> = results.iter().filter(|r| r.algorithm == alg).collect();
    rows.sort_by_key(|r| r.trial);
    rows
}

/// Wilcoxon tests of `alg` against `reference`, paired by trial.
///
/// Epochs and generalization are compared on trials where both algorithms
/// converged; convergence compares the per-trial 0/1 indicators over all
/// trials.
pub fn compare(results: &[TrialResult], alg: Algorithm, reference: Algorithm) -> Marks {
    let ours = by_algorithm(results, alg);
    let theirs = by_algorithm(results, reference);
    let pairs: Vec<(&TrialResult, &TrialResult)> = ours
        .iter()
        .filter_map(|a| theirs.iter().find(|b| b.trial == a.trial).map(|b| (*a, *b)))
        .collect();
    let both: Vec<_> = pairs
        .iter()
        .filter(|(a, b)| a.converged && b.converged)
        .collect();
    let test = |xs: Vec<f64>, ys: Vec<f64>| wilcoxon_signed_rank(&xs, &ys).ok();
    Marks {
        epochs: test(
            both.iter().map(|(a, _)| a.epochs as f64).collect(),
            both.iter().map(|(_, b)| b.epochs as f64).collect(),
        ),
        generalization: test(
            both.iter().map(|(a, _)| a.generalization).collect(),
            both.iter().map(|(_, b)| b.generalization).collect(),
        ),
        convergence: test(
            pairs
                .iter()
                .map(|(a, _)| f64::from(u8::from(a.converged)))
                .collect(),
            pairs
                .iter()
                .map(|(_, b)| f64::from(u8::from(b.converged)))
                .collect(),
        ),
    }
}

/// Per-algorithm summary in order of first appearance. `reference` is the
/// algorithm the others are tested against (ESLA if present, otherwise the
/// last algorithm).
pub fn summarize(results: &[TrialResult]) -> Result<BenchmarkSummary> {
    let first = results
        .first()
        .ok_or(Error::InvalidParameter("no trial results".into()))?;
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for r in results {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
    }
    let reference = if algorithms.contains(&Algorithm::Esla) {
        Algorithm::Esla
    } else {
        *algorithms.last().unwrap()
    };
    let rows = algorithms
        .iter()
        .map(|&alg| {
            let runs = by_algorithm(results, alg);
            let converged: Vec<_> = runs.iter().filter(|r| r.converged).collect();
            let convergence_pct = 100.0 * converged.len() as f64 / runs.len() as f64;
            let mean_generalization = mean(converged.iter().map(|r| r.generalization));
            let performance = performance(convergence_pct, mean_generalization.unwrap_or(0.0))?;
            Ok(AlgorithmSummary {
                algorithm: alg,
                trials: runs.len(),
                converged: converged.len(),
                convergence_pct,
                mean_epochs: mean(converged.iter().map(|r| r.epochs as f64)),
                mean_generalization,
                performance,
                marks: (alg != reference).then(|| compare(results, alg, reference)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkSummary {
        problem: first.problem.clone(),
        reference,
        rows,
    })
}

/// One row of a q-sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub q: f64,
    pub mean_epochs: Option<f64>,
    pub mean_generalization: Option<f64>,
    pub convergence_pct: f64,
}

/// Benchmarks `cfg` once per entry of `q_grid`, keeping `t0` fixed.
pub fn sweep_q(
    problem: &Problem,
    cfg: &OptimizerConfig,
    q_grid: &[f64],
    trials_per_q: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if q_grid.is_empty() {
        return Err(Error::InvalidParameter("empty q grid".into()));
    }
    q_grid
        .iter()
        .map(|&q| {
            let c = OptimizerConfig { q, ..cfg.clone() };
            let results = run_benchmark(problem, &[c], trials_per_q, base_seed, jobs)?;
            let summary = summarize(&results)?;
            let row = &summary.rows[0];
            Ok(SweepRow {
                q,
                mean_epochs: row.mean_epochs,
                mean_generalization: row.mean_generalization,
                convergence_pct: row.convergence_pct,
            })
        })
        .collect()
}

/// `start, start + step, ...` up to and including `end` (within 1e-9 of a
/// step), rounded to 10 decimals so `1.1:0.1:2.3` yields exactly 13 points.
pub fn q_grid(start: f64, step: f64, end: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(end >= start) {
        return Err(Error::InvalidParameter(format!(
            "bad grid {start}:{step}:{end}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}
