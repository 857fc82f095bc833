//! Run settings: command-line flags layered over an optional `key=value`
//! file layered over built-in defaults.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser};
use esla::data::BooleanEncoding;
use esla::eval::preset;
use esla::netcore::Activation;
use esla::optim::{Algorithm, OptimizerConfig, RpropVariant};

use crate::CliError;

/// Every setting a command can take. Each field is optional so that the
/// flag, file and default layers can be merged.
#[derive(Args, Debug, Clone, Default, PartialEq)]
pub struct RunArgs {
    /// Built-in problem: diabetes, cancer, thyroid, yeast, xor, parity3
    #[arg(long)]
    pub problem: Option<String>,
    /// PROBEN1-format data file
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Layer sizes such as 8-2-2-2
    #[arg(long)]
    pub topology: Option<String>,
    /// logistic, tansig or linear
    #[arg(long)]
    pub activation: Option<Activation>,
    /// rprop, hls or esla; a comma-separated list for bench and landscape
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Option<Vec<Algorithm>>,
    /// Entropic index
    #[arg(long)]
    pub q: Option<f64>,
    /// Initial temperature
    #[arg(long)]
    pub t0: Option<f64>,
    /// Strength of the weight-decay perturbation
    #[arg(long)]
    pub mu_prime: Option<f64>,
    /// Stepsize floor coefficient
    #[arg(long)]
    pub rho: Option<f64>,
    /// Training stops once the energy is at or below this value
    #[arg(long, allow_negative_numbers = true)]
    pub error_target: Option<f64>,
    /// Epoch budget per run
    #[arg(long)]
    pub max_epochs: Option<u64>,
    /// Trials per algorithm (bench, sweep)
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed; trial t uses seed + t
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Half-width of the uniform weight initialization
    #[arg(long)]
    pub init_range: Option<f64>,
    /// bipolar or binary (boolean problems)
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Option<BooleanEncoding>,
    /// Folds for cross-validated problems
    #[arg(long)]
    pub folds: Option<usize>,
    /// Initial Rprop stepsize
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Lower stepsize bound
    #[arg(long)]
    pub delta_min: Option<f64>,
    /// Upper stepsize bound
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Stepsize growth factor
    #[arg(long)]
    pub eta_plus: Option<f64>,
    /// Stepsize shrink factor
    #[arg(long)]
    pub eta_minus: Option<f64>,
    /// Learning-rate multiplier of the weight update
    #[arg(long)]
    pub tau: Option<f64>,
    /// Apply the stepsize floor in noisy modes (true/false)
    #[arg(long)]
    pub floor: Option<bool>,
    /// sign-change or backtracking
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<RpropVariant>,
    /// Write the parameters after every epoch (train)
    #[arg(long)]
    pub record_weights: Option<bool>,
    /// q grid as start:step:end (sweep)
    #[arg(long)]
    pub q_grid: Option<String>,
    /// Start point as w1,w2 (landscape)
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    /// Function table with w1,w2,f rows on a regular grid (landscape)
    #[arg(long)]
    pub function: Option<PathBuf>,
}

fn parse_encoding(s: &str) -> Result<BooleanEncoding, String> {
    match s {
        "bipolar" => Ok(BooleanEncoding::Bipolar),
        "binary" => Ok(BooleanEncoding::Binary),
        _ => Err(format!("expected bipolar or binary, got `{s}`")),
    }
}

fn parse_variant(s: &str) -> Result<RpropVariant, String> {
    match s {
        "sign-change" => Ok(RpropVariant::SignChange),
        "backtracking" => Ok(RpropVariant::Backtracking),
        _ => Err(format!("expected sign-change or backtracking, got `{s}`")),
    }
}

macro_rules! merge_fields {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        RunArgs { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl RunArgs {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: RunArgs) -> RunArgs {
        merge_fields!(
            self,
            lower,
            problem,
            data,
            topology,
            activation,
            algorithm,
            q,
            t0,
            mu_prime,
            rho,
            error_target,
            max_epochs,
            trials,
            seed,
            jobs,
            out,
            init_range,
            encoding,
            folds,
            delta0,
            delta_min,
            delta_max,
            eta_plus,
            eta_minus,
            tau,
            floor,
            variant,
            record_weights,
            q_grid,
            start,
            function
        )
    }

    /// Reads a config file of `key=value` lines. Keys are flag names
    /// without the leading dashes; `#` starts a comment line.
    pub fn from_file(path: &Path) -> Result<RunArgs, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_text(&text, path)
    }

    pub fn from_config_text(text: &str, origin: &Path) -> Result<RunArgs, CliError> {
        let known: HashSet<String> = FileArgs::command()
            .get_arguments()
            .filter_map(|a| a.get_long().map(str::to_string))
            .collect();
        let mut seen = HashSet::new();
        let mut argv = vec!["config".to_string()];
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |m: String| CliError::Usage(format!("{}:{}: {m}", origin.display(), no + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !known.contains(key) {
                return Err(at(format!("unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            argv.push(format!("--{key}={value}"));
        }
        FileArgs::try_parse_from(argv)
            .map(|f| f.run)
            .map_err(|e| CliError::Usage(format!("{}: {}", origin.display(), e.render())))
    }
}

#[derive(Parser)]
#[command(disable_help_flag = true)]
struct FileArgs {
    #[command(flatten)]
    run: RunArgs,
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub data: Option<PathBuf>,
    pub topology: Option<String>,
    pub activation: Option<Activation>,
    pub algorithms: Vec<Algorithm>,
    /// Optimizer settings; `algorithm` is that of the first entry of
    /// `algorithms`.
    pub optimizer: OptimizerConfig,
    pub trials: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub init_range: f64,
    pub encoding: BooleanEncoding,
    pub folds: Option<usize>,
    pub q_grid: String,
    pub start: Option<[f64; 2]>,
    pub function: Option<PathBuf>,
}

pub const DEFAULT_TRIALS: usize = 300;
pub const DEFAULT_OUT: &str = "esla-out";
pub const DEFAULT_Q_GRID: &str = "1.1:0.1:2.3";

impl RunConfig {
    /// Resolves `args` against `base` optimizer settings. A named problem
    /// contributes its own `q`, `t0` and error target beneath any explicit
    /// value.
    pub fn resolve(
        args: RunArgs,
        base: OptimizerConfig,
        default_algorithms: &[Algorithm],
    ) -> Result<RunConfig, CliError> {
        let mut opt = base;
        if let Some(name) = &args.problem {
            let p = preset(name).map_err(|e| CliError::Usage(e.to_string()))?;
            opt.q = p.q;
            opt.t0 = p.t0;
            opt.error_target = p.error_target;
        }
        let algorithms = args
            .algorithm
            .unwrap_or_else(|| default_algorithms.to_vec());
        if algorithms.is_empty() {
            return Err(CliError::Usage("no algorithm given".into()));
        }
        opt.algorithm = algorithms[0];
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = args.$f { opt.$f = v; })* };
        }
        set!(
            q,
            t0,
            mu_prime,
            rho,
            error_target,
            max_epochs,
            delta0,
            delta_min,
            delta_max,
            eta_plus,
            eta_minus,
            tau,
            floor,
            variant,
            record_weights
        );
        for alg in &algorithms {
            opt.with_algorithm(*alg)
                .validate()
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        let start = args.start.as_deref().map(parse_point).transpose()?;
        let init_range = args
            .init_range
            .unwrap_or(esla::eval::problems::DEFAULT_INIT_RANGE);
        if !(init_range >= 0.0) || !init_range.is_finite() {
            return Err(CliError::Usage(format!(
                "init-range must be >= 0, got {init_range}"
            )));
        }
        let trials = args.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        if args.jobs == Some(0) {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            problem: args.problem,
            data: args.data,
            topology: args.topology,
            activation: args.activation,
            algorithms,
            optimizer: opt,
            trials,
            seed: args.seed.unwrap_or(0),
            jobs: args.jobs,
            out: args.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            init_range,
            encoding: args.encoding.unwrap_or_default(),
            folds: args.folds,
            q_grid: args.q_grid.unwrap_or_else(|| DEFAULT_Q_GRID.into()),
            start,
            function: args.function,
        })
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Usage(format!("start must be w1,w2, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok([a, b])
}

/// `start:step:end`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Usage(format!("q-grid `{s}`: {m}"));
    let parts: Vec<&str> = s.split(':').collect();
    let nums = match parts.as_slice() {
        [a, b, c] => [a, b, c].map(|p| p.trim().parse::<f64>()),
        [a] => {
            let v = a.trim().parse::<f64>();
            [v.clone(), Ok(1.0), v]
        }
        _ => return Err(bad("expected start:step:end".into())),
    };
    let [a, b, c] = nums;
    let (a, b, c) = match (a, b, c) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return Err(bad("not a number".into())),
    };
    esla::eval::q_grid(a, b, c).map_err(|e| bad(e.to_string()))
}
