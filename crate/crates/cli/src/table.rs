//! Tabulated 2-D functions for the landscape command.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Values on a rectangular lattice, bilinearly interpolated. Points outside
/// the lattice evaluate to NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major in `x`: `values[i * ys.len() + j]` is `f(xs[i], ys[j])`.
    values: Vec<f64>,
}

impl GridFunction {
    /// Parses `w1,w2,f` rows; an optional first line of column names is
    /// skipped. Every `(x, y)` pair of the lattice must occur exactly once.
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let at =
            |line: usize, m: String| CliError::Data(format!("{}:{line}: {m}", origin.display()));
        let mut points: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(at(
                    no + 1,
                    format!("expected 3 fields, got {}", fields.len()),
                ));
            }
            let nums: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            let nums = match nums {
                Ok(n) => n,
                Err(_) if no == 0 => continue,
                Err(_) => return Err(at(no + 1, format!("not a number in `{line}`"))),
            };
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(at(no + 1, "non-finite value".into()));
            }
            let key = (order_key(nums[0]), order_key(nums[1]));
            if points.insert(key, nums[2]).is_some() {
                return Err(at(
                    no + 1,
                    format!("duplicate point ({}, {})", nums[0], nums[1]),
                ));
            }
            xs.push(nums[0]);
            ys.push(nums[1]);
        }
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        if xs.len() < 2 || ys.len() < 2 {
            return Err(CliError::Data(format!(
                "{}: need at least a 2 x 2 lattice",
                origin.display()
            )));
        }
        if points.len() != xs.len() * ys.len() {
            return Err(CliError::Data(format!(
                "{}: {} points do not fill a {} x {} lattice",
                origin.display(),
                points.len(),
                xs.len(),
                ys.len()
            )));
        }
        let values = points.into_values().collect();
        Ok(Self { xs, ys, values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    pub fn value(&self, w: [f64; 2]) -> f64 {
        let (Some((i, tx)), Some((j, ty))) = (cell(&self.xs, w[0]), cell(&self.ys, w[1])) else {
            return f64::NAN;
        };
        let n = self.ys.len();
        let f = |a: usize, b: usize| self.values[a * n + b];
        let low = f(i, j) * (1.0 - ty) + f(i, j + 1) * ty;
        let high = f(i + 1, j) * (1.0 - ty) + f(i + 1, j + 1) * ty;
        low * (1.0 - tx) + high * tx
    }
}

/// Monotone integer key of a finite float, so lattice points sort by value.
fn order_key(v: f64) -> u64 {
    let bits = (v + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

/// Index of the lattice cell containing `v` and the position inside it.
fn cell(axis: &[f64], v: f64) -> Option<(usize, f64)> {
    let last = axis.len() - 1;
    if !(v >= axis[0] && v <= axis[last]) {
        return None;
    }
    let i = axis
        .partition_point(|&a| a <= v)
        .saturating_sub(1)
        .min(last - 1);
    Some((i, (v - axis[i]) / (axis[i + 1] - axis[i])))
}
