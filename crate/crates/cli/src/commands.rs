//! Command implementations.

use std::fs;
use std::path::Path;

use esla::data::load_proben1;
use esla::eval::report::{
    energy_trace_csv, results_csv, summary_csv, summary_table, sweep_csv, sweep_table,
    trajectory_csv, weight_trace_csv,
};
use esla::eval::{
    landscape_config, landscape_trace, preset, run_benchmark, summarize, sweep_q, BasinMap,
    DataSource, FnObjective, Preset, Problem, ThreeBasin, TrialResult, THREE_BASIN_START,
};
use esla::netcore::{Activation, Dataset, Network, Topology};
use esla::optim::{train as train_net, Algorithm, OptimizerConfig};

use crate::config::{parse_grid, RunArgs, RunConfig};
use crate::table::GridFunction;
use crate::CliError;

fn core(e: esla::Error) -> CliError {
    CliError::from_core(e)
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .and_then(|()| fs::write(dir.join(name), text))
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn topology_for(cfg: &RunConfig, preset: Option<&Preset>) -> Result<Topology, CliError> {
    let activation = cfg
        .activation
        .or(preset.map(|p| p.activation))
        .unwrap_or(Activation::Logistic);
    match (&cfg.topology, preset) {
        (Some(spec), _) => {
            Topology::parse(spec, activation).map_err(|e| CliError::Usage(e.to_string()))
        }
        (None, Some(p)) => Topology::uniform(p.layers.to_vec(), activation).map_err(core),
        (None, None) => Err(CliError::Usage(
            "--topology is required when no --problem is given".into(),
        )),
    }
}

fn check_shape(topology: &Topology, data: &Dataset) -> Result<(), CliError> {
    if topology.inputs() != data.input_dim() || topology.outputs() != data.target_dim() {
        return Err(CliError::Usage(format!(
            "topology {topology} needs {} inputs and {} outputs; the data has {} and {}",
            topology.inputs(),
            topology.outputs(),
            data.input_dim(),
            data.target_dim()
        )));
    }
    Ok(())
}

fn load(
    path: &Path,
) -> Result<(esla::data::ProbenHeader, Dataset, esla::data::SplitPlan), CliError> {
    load_proben1(path).map_err(|e| CliError::Data(e.to_string()))
}

/// Builds the benchmark problem named by `--problem` and/or `--data`.
pub fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let preset = cfg
        .problem
        .as_deref()
        .map(preset)
        .transpose()
        .map_err(core)?;
    let topology = topology_for(cfg, preset)?;
    let mut problem = match preset.map(|p| p.source) {
        Some(DataSource::Boolean(b)) => {
            if cfg.data.is_some() {
                return Err(CliError::Usage(format!(
                    "problem `{}` is generated; --data is not used",
                    preset.unwrap().name
                )));
            }
            let p = Problem::boolean(b, topology, cfg.encoding);
            if let esla::eval::Evaluation::Training(d) = &p.evaluation {
                check_shape(&p.topology, d)?;
            }
            p
        }
        source => {
            let name = match preset {
                Some(p) => p.name.to_string(),
                None => cfg
                    .data
                    .as_deref()
                    .and_then(Path::file_stem)
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "data".into()),
            };
            let path = cfg.data.as_deref().ok_or_else(|| match preset {
                Some(p) => CliError::Usage(format!(
                    "problem `{}` needs its data file: pass --data <PROBEN1 file>",
                    p.name
                )),
                None => CliError::Usage("give --problem or --data".into()),
            })?;
            let (_, data, plan) = load(path)?;
            check_shape(&topology, &data)?;
            match (source, cfg.folds) {
                (Some(DataSource::CrossValidated { k }), folds) => {
                    Problem::cross_validated(name, topology, &data, folds.unwrap_or(k), cfg.seed)
                        .map_err(core)?
                }
                (_, Some(k)) => {
                    Problem::cross_validated(name, topology, &data, k, cfg.seed).map_err(core)?
                }
                _ => Problem::holdout(name, topology, &data, &plan).map_err(core)?,
            }
        }
    };
    problem.init_range = cfg.init_range;
    Ok(problem)
}

pub fn train(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, OptimizerConfig::default(), &[Algorithm::Esla])?;
    if cfg.algorithms.len() != 1 {
        return Err(CliError::Usage("train runs exactly one algorithm".into()));
    }
    let problem = build_problem(&cfg)?;
    let net = Network::init_weights(problem.topology.clone(), cfg.seed, problem.init_range)
        .map_err(core)?;
    let (train_set, score_set) = problem.evaluation.for_trial(0);
    let (trained, report) = train_net(&net, train_set, &cfg.optimizer, cfg.seed).map_err(core)?;
    let generalization = match report.abort {
        Some(_) => 0.0,
        None => trained.classify(score_set).map_err(core)?,
    };
    let result = TrialResult {
        problem: problem.name.clone(),
        algorithm: cfg.optimizer.algorithm,
        trial: 0,
        seed: cfg.seed,
        epochs: report.epochs_run,
        converged: report.converged,
        generalization,
        final_energy: report.final_energy,
    };
    write_out(
        &cfg.out,
        "train_report.csv",
        &results_csv(std::slice::from_ref(&result)),
    )?;
    write_out(&cfg.out, "energy_trace.csv", &energy_trace_csv(&report))?;
    if let Some(w) = weight_trace_csv(&report) {
        write_out(&cfg.out, "weight_trace.csv", &w)?;
    }
    println!(
        "{} {}: epochs={} converged={} energy={} generalization={:.1}%",
        result.problem,
        result.algorithm,
        result.epochs,
        result.converged,
        result.final_energy,
        generalization
    );
    match report.abort {
        Some(why) => Err(CliError::Runtime(why)),
        None => Ok(()),
    }
}

pub fn bench(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, OptimizerConfig::default(), &Algorithm::ALL)?;
    let problem = build_problem(&cfg)?;
    let configs: Vec<OptimizerConfig> = cfg
        .algorithms
        .iter()
        .map(|&a| cfg.optimizer.with_algorithm(a))
        .collect();
    let results =
        run_benchmark(&problem, &configs, cfg.trials, cfg.seed, cfg.jobs).map_err(core)?;
    let summary = summarize(&results).map_err(core)?;
    let table = summary_table(&summary);
    write_out(&cfg.out, "results.csv", &results_csv(&results))?;
    write_out(&cfg.out, "summary.csv", &summary_csv(&summary))?;
    write_out(&cfg.out, "summary.txt", &table)?;
    print!("{table}");
    Ok(())
}

pub fn sweep(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, OptimizerConfig::default(), &[Algorithm::Esla])?;
    if cfg.algorithms.len() != 1 {
        return Err(CliError::Usage("sweep runs exactly one algorithm".into()));
    }
    let grid = parse_grid(&cfg.q_grid)?;
    for &q in &grid {
        OptimizerConfig {
            q,
            ..cfg.optimizer.clone()
        }
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let problem = build_problem(&cfg)?;
    let rows = sweep_q(
        &problem,
        &cfg.optimizer,
        &grid,
        cfg.trials,
        cfg.seed,
        cfg.jobs,
    )
    .map_err(core)?;
    write_out(&cfg.out, "sweep.csv", &sweep_csv(&rows))?;
    print!("{}", sweep_table(&rows));
    Ok(())
}

pub fn landscape(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, landscape_config(Algorithm::Esla), &Algorithm::ALL)?;
    let start = cfg.start.unwrap_or(THREE_BASIN_START);
    let configs: Vec<OptimizerConfig> = cfg
        .algorithms
        .iter()
        .map(|&a| cfg.optimizer.with_algorithm(a))
        .collect();
    let trajectories = match &cfg.function {
        Some(path) => {
            let table = GridFunction::load(path)?;
            if table.value(start).is_nan() {
                return Err(CliError::Usage(format!(
                    "start ({}, {}) lies outside the function table",
                    start[0], start[1]
                )));
            }
            let mut f = FnObjective::new(|w| table.value(w));
            landscape_trace(&mut f, start, &configs, cfg.seed).map_err(core)?
        }
        None => {
            let mut f = ThreeBasin::default();
            landscape_trace(&mut f, start, &configs, cfg.seed).map_err(core)?
        }
    };
    let basins = cfg
        .function
        .is_none()
        .then(|| BasinMap::three_basin(&ThreeBasin::default()));
    for t in &trajectories {
        write_out(
            &cfg.out,
            &format!("trajectory_{}.csv", t.algorithm),
            &trajectory_csv(t),
        )?;
        let end = t.end();
        let f = t.values.last().copied().unwrap_or(f64::NAN);
        let basin = match basins.as_ref().map(|b| b.basin_of(end)) {
            Some(Some(0)) => " (global basin)",
            Some(Some(_)) => " (local basin)",
            Some(None) => " (plateau)",
            None => "",
        };
        println!(
            "{}: end ({:.4}, {:.4}) f={:.6}{basin}",
            t.algorithm, end[0], end[1], f
        );
    }
    Ok(())
}

pub fn validate_data(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(args, OptimizerConfig::default(), &[Algorithm::Esla])?;
    let path = cfg
        .data
        .as_deref()
        .ok_or_else(|| CliError::Usage("validate-data needs --data <PROBEN1 file>".into()))?;
    let (header, data, plan) = load(path)?;
    if cfg.problem.is_some() || cfg.topology.is_some() {
        let preset = cfg
            .problem
            .as_deref()
            .map(preset)
            .transpose()
            .map_err(core)?;
        let topology = topology_for(&cfg, preset)?;
        check_shape(&topology, &data).map_err(|e| match e {
            CliError::Usage(m) => CliError::Data(m),
            other => other,
        })?;
    }
    let mut counts = std::collections::BTreeMap::new();
    for &c in data.labels().unwrap_or(&[]) {
        *counts.entry(c).or_insert(0usize) += 1;
    }
    println!("{}: ok", path.display());
    println!("inputs={} outputs={}", header.inputs(), header.outputs());
    println!(
        "examples={} (train {}, validation {}, test {})",
        data.len(),
        plan.train_idx.len(),
        plan.valid_idx.len(),
        plan.test_idx.len()
    );
    let classes: Vec<String> = counts.iter().map(|(c, n)| format!("{c}:{n}")).collect();
    println!("classes {}", classes.join(" "));
    Ok(())
}
