//! Dataset construction: PROBEN1 files, 50/25/25 splits, stratified folds
//! and the boolean benchmark problems.
//!
//! # PROBEN1 format
//!
//! A header of seven `key=value` lines
//!
//! ```text
//! bool_in=0
//! real_in=8
//! bool_out=2
//! real_out=0
//! training_examples=384
//! validation_examples=192
//! test_examples=192
//! ```
//!
//! followed by one whitespace-separated row per pattern holding
//! `bool_in + real_in` inputs and then `bool_out + real_out` outputs. The
//! first `training_examples` rows form the training set, the next
//! `validation_examples` the validation set and the rest the test set.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netcore::{Dataset, Pattern};

pub const HEADER_KEYS: [&str; 7] = [
    "bool_in",
    "real_in",
    "bool_out",
    "real_out",
    "training_examples",
    "validation_examples",
    "test_examples",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProbenHeader {
    pub bool_in: usize,
    pub real_in: usize,
    pub bool_out: usize,
    pub real_out: usize,
    pub training_examples: usize,
    pub validation_examples: usize,
    pub test_examples: usize,
}

impl ProbenHeader {
    pub fn inputs(&self) -> usize {
        self.bool_in + self.real_in
    }

    pub fn outputs(&self) -> usize {
        self.bool_out + self.real_out
    }

    pub fn total_examples(&self) -> usize {
        self.training_examples + self.validation_examples + self.test_examples
    }

    fn field_mut(&mut self, key: &str) -> Option<&mut usize> {
        Some(match key {
            "bool_in" => &mut self.bool_in,
            "real_in" => &mut self.real_in,
            "bool_out" => &mut self.bool_out,
            "real_out" => &mut self.real_out,
            "training_examples" => &mut self.training_examples,
            "validation_examples" => &mut self.validation_examples,
            "test_examples" => &mut self.test_examples,
            _ => return None,
        })
    }

    fn fields(&self) -> [usize; 7] {
        [
            self.bool_in,
            self.real_in,
            self.bool_out,
            self.real_out,
            self.training_examples,
            self.validation_examples,
            self.test_examples,
        ]
    }
}

/// Disjoint train/validation/test index sets covering a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_idx: Vec<usize>,
    pub valid_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

impl SplitPlan {
    /// Consecutive blocks in file order.
    pub fn from_counts(train: usize, valid: usize, test: usize) -> Self {
        Self {
            train_idx: (0..train).collect(),
            valid_idx: (train..train + valid).collect(),
            test_idx: (train + valid..train + valid + test).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.train_idx.len() + self.valid_idx.len() + self.test_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a PROBEN1 file. Class labels are attached from the target vectors
/// (argmax, or threshold 0.5 for a single output).
pub fn load_proben1(path: impl AsRef<Path>) -> Result<(ProbenHeader, Dataset, SplitPlan)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_proben1(&text, path)
}

/// Parses PROBEN1 text; `origin` only labels error messages.
pub fn parse_proben1(text: &str, origin: &Path) -> Result<(ProbenHeader, Dataset, SplitPlan)> {
    let mut header = ProbenHeader::default();
    let mut seen = [false; 7];
    let mut lines = text.lines().enumerate().peekable();

    while seen.iter().any(|s| !s) {
        let Some((no, raw)) = lines.next() else {
            let missing: Vec<&str> = HEADER_KEYS
                .iter()
                .zip(seen)
                .filter(|(_, s)| !s)
                .map(|(k, _)| *k)
                .collect();
            return Err(parse_err(
                origin,
                text.lines().count().max(1),
                format!("missing header fields: {}", missing.join(", ")),
            ));
        };
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            parse_err(
                origin,
                no + 1,
                format!("expected `key=value`, got `{line}`"),
            )
        })?;
        let key = key.trim();
        let slot = HEADER_KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| parse_err(origin, no + 1, format!("unknown header key `{key}`")))?;
        if seen[slot] {
            return Err(parse_err(
                origin,
                no + 1,
                format!("duplicate header key `{key}`"),
            ));
        }
        let value: usize = value.trim().parse().map_err(|_| {
            parse_err(
                origin,
                no + 1,
                format!(
                    "header value `{}` is not a non-negative integer",
                    value.trim()
                ),
            )
        })?;
        *header.field_mut(key).unwrap() = value;
        seen[slot] = true;
    }
    let header_end = lines.peek().map(|(no, _)| *no).unwrap_or(0);
    if header.inputs() == 0 || header.outputs() == 0 {
        return Err(parse_err(
            origin,
            header_end.max(1),
            "header declares no inputs or no outputs",
        ));
    }

    let (n_in, n_out) = (header.inputs(), header.outputs());
    let mut patterns = Vec::with_capacity(header.total_examples());
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(origin, no + 1, format!("non-numeric token `{tok}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != n_in + n_out {
            return Err(parse_err(
                origin,
                no + 1,
                format!("expected {} values, found {}", n_in + n_out, values.len()),
            ));
        }
        let target = values[n_in..].to_vec();
        let mut input = values;
        input.truncate(n_in);
        patterns.push(Pattern::new(input, target));
    }
    if patterns.len() != header.total_examples() {
        return Err(parse_err(
            origin,
            text.lines().count(),
            format!(
                "header announces {} examples, file holds {}",
                header.total_examples(),
                patterns.len()
            ),
        ));
    }
    let data = Dataset::new(patterns)
        .map_err(|e| parse_err(origin, header_end + 1, e.to_string()))?
        .with_labels_from_targets(0.5);
    let plan = SplitPlan::from_counts(
        header.training_examples,
        header.validation_examples,
        header.test_examples,
    );
    Ok((header, data, plan))
}

/// Writes a dataset in PROBEN1 format. Values use Rust's shortest
/// round-tripping float formatting, so parsing the output reproduces every
/// number exactly.
pub fn write_proben1(header: &ProbenHeader, data: &Dataset) -> String {
    let mut out = String::new();
    for (key, value) in HEADER_KEYS.iter().zip(header.fields()) {
        let _ = writeln!(out, "{key}={value}");
    }
    for p in data.patterns() {
        let row: Vec<String> = p
            .input
            .iter()
            .chain(&p.target)
            .map(|v| format!("{v:?}"))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Default 50/25/25 split. With `shuffle` the indices are permuted by a
/// ChaCha8 stream seeded with `seed`; without it the original order is kept.
pub fn split_ratio(data: &Dataset, seed: u64, shuffle: bool) -> Result<SplitPlan> {
    let n = data.len();
    if n < 4 {
        return Err(Error::TooFewPatterns { needed: 4, have: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let n_train = n / 2;
    let n_valid = n / 4;
    let test_idx = order.split_off(n_train + n_valid);
    let valid_idx = order.split_off(n_train);
    Ok(SplitPlan {
        train_idx: order,
        valid_idx,
        test_idx,
    })
}

/// `k` disjoint folds with per-class proportional membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Training indices (all other folds, ascending) and held-out indices of
    /// fold `i`.
    pub fn train_test(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, self.folds[i].clone())
    }
}

/// Stratified k-fold assignment.
///
/// Each class's indices are shuffled, then classes are dealt in ascending
/// label order round-robin over the folds with a single running counter.
/// Fold sizes therefore differ by at most one and every class is spread
/// within one pattern of its proportional share.
pub fn stratified_kfold(data: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k-fold needs k >= 2, got {k}"
        )));
    }
    if data.len() < k {
        return Err(Error::TooFewPatterns {
            needed: k,
            have: data.len(),
        });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut counter = 0usize;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[counter % k].push(i);
            counter += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BooleanProblem {
    Xor,
    Parity3,
}

impl BooleanProblem {
    pub fn arity(self) -> usize {
        match self {
            BooleanProblem::Xor => 2,
            BooleanProblem::Parity3 => 3,
        }
    }
}

/// Encoding of boolean inputs and targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BooleanEncoding {
    /// `false = -1`, `true = +1`; pairs with tansig outputs.
    #[default]
    Bipolar,
    /// `false = 0`, `true = 1`; pairs with logistic outputs.
    Binary,
}

impl BooleanEncoding {
    fn encode(self, bit: bool) -> f64 {
        match (self, bit) {
            (_, true) => 1.0,
            (BooleanEncoding::Bipolar, false) => -1.0,
            (BooleanEncoding::Binary, false) => 0.0,
        }
    }
}

/// Full truth table of XOR or 3-bit parity: the target is true iff an odd
/// number of inputs are true. Labels are the target bits.
pub fn gen_boolean(problem: BooleanProblem, encoding: BooleanEncoding) -> Dataset {
    let n = problem.arity();
    let mut patterns = Vec::with_capacity(1 << n);
    let mut labels = Vec::with_capacity(1 << n);
    for row in 0..(1usize << n) {
        let bits: Vec<bool> = (0..n).rev().map(|b| row >> b & 1 == 1).collect();
        let odd = bits.iter().filter(|&&b| b).count() % 2 == 1;
        patterns.push(Pattern::new(
            bits.iter().map(|&b| encoding.encode(b)).collect(),
            vec![encoding.encode(odd)],
        ));
        labels.push(usize::from(odd));
    }
    Dataset::new(patterns)
        .and_then(|d| d.with_labels(labels))
        .expect("truth tables are well formed")
}

/// Path helper used in error messages for in-memory sources.
pub fn memory_origin() -> PathBuf {
    PathBuf::from("<memory>")
}
