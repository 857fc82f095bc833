//! Benchmark problems and the built-in registry of their default settings.

use crate::data::{gen_boolean, stratified_kfold, BooleanEncoding, BooleanProblem, SplitPlan};
use crate::error::{Error, Result};
use crate::netcore::{Activation, Dataset, Topology};

/// How the generalization of a trained network is measured.
#[derive(Debug, Clone)]
pub enum Evaluation {
    /// Train and score on the same patterns (boolean problems).
    Training(Dataset),
    /// Train on one set, score on a disjoint test set.
    Holdout { train: Dataset, test: Dataset },
    /// Trial `t` trains on every fold but `t % k` and scores on fold `t % k`.
    CrossValidation { folds: Vec<(Dataset, Dataset)> },
}

impl Evaluation {
    /// `(training set, scoring set)` for trial `t`.
    pub fn for_trial(&self, t: usize) -> (&Dataset, &Dataset) {
        match self {
            Evaluation::Training(d) => (d, d),
            Evaluation::Holdout { train, test } => (train, test),
            Evaluation::CrossValidation { folds } => {
                let (train, test) = &folds[t % folds.len()];
                (train, test)
            }
        }
    }
}

/// A runnable benchmark: network shape plus data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub topology: Topology,
    pub evaluation: Evaluation,
    /// Half-width of the uniform weight initialization.
    pub init_range: f64,
}

pub const DEFAULT_INIT_RANGE: f64 = 0.5;

impl Problem {
    pub fn boolean(problem: BooleanProblem, topology: Topology, encoding: BooleanEncoding) -> Self {
        let name = match problem {
            BooleanProblem::Xor => "xor",
            BooleanProblem::Parity3 => "parity3",
        };
        Self {
            name: name.into(),
            topology,
            evaluation: Evaluation::Training(gen_boolean(problem, encoding)),
            init_range: DEFAULT_INIT_RANGE,
        }
    }

    /// Trains on the plan's training block and scores on its test block.
    /// The validation block is left unused.
    pub fn holdout(
        name: impl Into<String>,
        topology: Topology,
        data: &Dataset,
        plan: &SplitPlan,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            topology,
            evaluation: Evaluation::Holdout {
                train: data.subset(&plan.train_idx)?,
                test: data.subset(&plan.test_idx)?,
            },
            init_range: DEFAULT_INIT_RANGE,
        })
    }

    pub fn cross_validated(
        name: impl Into<String>,
        topology: Topology,
        data: &Dataset,
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        let plan = stratified_kfold(data, k, seed)?;
        let folds = (0..plan.k())
            .map(|i| {
                let (train, test) = plan.train_test(i);
                Ok((data.subset(&train)?, data.subset(&test)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.into(),
            topology,
            evaluation: Evaluation::CrossValidation { folds },
            init_range: DEFAULT_INIT_RANGE,
        })
    }
}

/// Where a preset's data comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Boolean(BooleanProblem),
    /// A user-supplied PROBEN1 file, split by its header.
    Proben1,
    /// A user-supplied PROBEN1-format file scored by stratified k-fold.
    CrossValidated {
        k: usize,
    },
}

/// Default settings of a named benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub layers: &'static [usize],
    pub activation: Activation,
    pub error_target: f64,
    pub q: f64,
    pub t0: f64,
    pub source: DataSource,
}

impl Preset {
    pub fn topology(&self) -> Topology {
        Topology::uniform(self.layers.to_vec(), self.activation).expect("presets are valid")
    }
}

pub const PRESETS: [Preset; 6] = [
    Preset {
        name: "diabetes",
        layers: &[8, 2, 2, 2],
        activation: Activation::Logistic,
        error_target: 0.14,
        q: 1.6,
        t0: 2.0,
        source: DataSource::Proben1,
    },
    Preset {
        name: "cancer",
        layers: &[9, 4, 2, 2],
        activation: Activation::Logistic,
        error_target: 0.02,
        q: 1.7,
        t0: 2.0,
        source: DataSource::Proben1,
    },
    Preset {
        name: "thyroid",
        layers: &[21, 16, 8, 3],
        activation: Activation::Logistic,
        error_target: 0.0036,
        q: 1.7,
        t0: 2.0,
        source: DataSource::Proben1,
    },
    Preset {
        name: "yeast",
        layers: &[8, 16, 10],
        activation: Activation::Logistic,
        error_target: 0.05,
        q: 1.6,
        t0: 2.0,
        source: DataSource::CrossValidated { k: 10 },
    },
    Preset {
        name: "xor",
        layers: &[2, 2, 1],
        activation: Activation::Tansig,
        error_target: 1e-5,
        q: 2.1,
        t0: 2.0,
        source: DataSource::Boolean(BooleanProblem::Xor),
    },
    Preset {
        name: "parity3",
        layers: &[3, 3, 1],
        activation: Activation::Tansig,
        error_target: 5e-5,
        q: 1.1,
        t0: 2.0,
        source: DataSource::Boolean(BooleanProblem::Parity3),
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            Error::InvalidParameter(format!(
                "unknown problem `{name}` (known: {})",
                known.join(", ")
            ))
        })
}
