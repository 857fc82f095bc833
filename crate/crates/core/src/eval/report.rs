//! Comma-separated and plain-text renderings of results.
//!
//! Every writer is a pure function of its input, so identical results give
//! byte-identical files.

use std::fmt::Write as _;

use super::harness::{AlgorithmSummary, BenchmarkSummary, SweepRow, TrialResult};
use super::landscape::Trajectory;
use super::wilcoxon::WilcoxonResult;
use crate::error::{Error, Result};
use crate::optim::TrainReport;

pub const RESULTS_HEADER: &str =
    "problem,algorithm,seed,epochs,converged,generalization,final_energy";

pub fn results_csv(results: &[TrialResult]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.problem, r.algorithm, r.seed, r.epochs, r.converged, r.generalization, r.final_energy
        );
    }
    out
}

/// Reads records written by [`results_csv`]. Trial indices are assigned per
/// algorithm in file order.
pub fn parse_results_csv(text: &str) -> Result<Vec<TrialResult>> {
    let origin = std::path::PathBuf::from("<results>");
    let err = |line: usize, message: String| Error::Parse {
        path: origin.clone(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => return Err(err(1, format!("expected header `{RESULTS_HEADER}`"))),
    }
    let mut counters = std::collections::HashMap::new();
    let mut out = Vec::new();
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(err(no + 1, format!("expected 7 fields, got {}", f.len())));
        }
        let bad = |what: &str| err(no + 1, format!("bad {what} `{line}`"));
        let algorithm = f[1].parse().map_err(|_| bad("algorithm"))?;
        let trial = counters.entry(algorithm).or_insert(0usize);
        out.push(TrialResult {
            problem: f[0].to_string(),
            algorithm,
            trial: *trial,
            seed: f[2].parse().map_err(|_| bad("seed"))?,
            epochs: f[3].parse().map_err(|_| bad("epochs"))?,
            converged: f[4].parse().map_err(|_| bad("converged flag"))?,
            generalization: f[5].parse().map_err(|_| bad("generalization"))?,
            final_energy: f[6].parse().map_err(|_| bad("final energy"))?,
        });
        *trial += 1;
    }
    Ok(out)
}

/// `+` when significant at 0.05, `-` when not, `n/a` when untestable.
pub fn mark(test: Option<&WilcoxonResult>) -> &'static str {
    match test {
        Some(t) if t.significant => "+",
        Some(_) => "-",
        None => "n/a",
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "nan".into(), |x| format!("{x:.decimals$}"))
}

fn row_marks(row: &AlgorithmSummary) -> [Option<&'static str>; 3] {
    match &row.marks {
        Some(m) => [
            Some(mark(m.epochs.as_ref())),
            Some(mark(m.generalization.as_ref())),
            Some(mark(m.convergence.as_ref())),
        ],
        None => [None; 3],
    }
}

pub const SUMMARY_HEADER: &str = "problem,algorithm,trials,converged,convergence,epochs,generalization,performance,epochs_mark,generalization_mark,convergence_mark";

pub fn summary_csv(summary: &BenchmarkSummary) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in &summary.rows {
        let m = row_marks(row).map(|m| m.unwrap_or(""));
        let _ = writeln!(
            out,
            "{},{},{},{},{:.2},{},{},{:.2},{},{},{}",
            summary.problem,
            row.algorithm,
            row.trials,
            row.converged,
            row.convergence_pct,
            opt(row.mean_epochs, 1),
            opt(row.mean_generalization, 2),
            row.performance,
            m[0],
            m[1],
            m[2]
        );
    }
    out
}

/// Aligned table in the layout `Algorithm | Epochs | Generalization |
/// Convergence | Performance`, with `(+)`/`(-)` marks against the reference
/// algorithm.
pub fn summary_table(summary: &BenchmarkSummary) -> String {
    let header = [
        "Algorithm",
        "Epochs",
        "Generalization",
        "Convergence",
        "Performance",
    ];
    let mut rows: Vec<[String; 5]> = Vec::new();
    for row in &summary.rows {
        let m = row_marks(row);
        let with = |s: String, k: usize| match m[k] {
            Some(mk) => format!("{s} ({mk})"),
            None => s,
        };
        rows.push([
            row.algorithm.name().to_string(),
            with(opt(row.mean_epochs, 0), 0),
            with(format!("{} (%)", opt(row.mean_generalization, 1)), 1),
            with(format!("{:.1} (%)", row.convergence_pct), 2),
            format!("{:.1}", row.performance),
        ]);
    }
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = format!(
        "{} ({} trials, reference {})\n",
        summary.problem,
        summary.rows.first().map_or(0, |r| r.trials),
        summary.reference
    );
    let line = |cells: &[&str]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    out.push_str(&line(&header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        out.push_str(&line(&cells));
        out.push('\n');
    }
    out
}

pub const SWEEP_HEADER: &str = "q,epochs,generalization,convergence";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.2}",
            r.q,
            opt(r.mean_epochs, 1),
            opt(r.mean_generalization, 2),
            r.convergence_pct
        );
    }
    out
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = format!(
        "{:>6}  {:>8}  {:>14}  {:>11}\n",
        "q", "Epochs", "Generalization", "Convergence"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6}  {:>8}  {:>14}  {:>11}",
            r.q,
            opt(r.mean_epochs, 0),
            opt(r.mean_generalization, 1),
            format!("{:.1}", r.convergence_pct)
        );
    }
    out
}

pub const TRAJECTORY_HEADER: &str = "k,w1,w2,f";

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (k, (p, f)) in t.points.iter().zip(&t.values).enumerate() {
        let _ = writeln!(out, "{k},{},{},{}", p[0], p[1], f);
    }
    out
}

pub fn energy_trace_csv(report: &TrainReport) -> String {
    let mut out = String::from("epoch,energy\n");
    for (k, e) in report.energy_trace.iter().enumerate() {
        let _ = writeln!(out, "{},{}", k + 1, e);
    }
    out
}

/// One row per snapshot: `epoch,p0,p1,...` (epoch 0 is the initialization).
pub fn weight_trace_csv(report: &TrainReport) -> Option<String> {
    let trace = report.weight_trace.as_ref()?;
    let width = trace.first().map_or(0, Vec::len);
    let mut out = String::from("epoch");
    for i in 0..width {
        let _ = write!(out, ",p{i}");
    }
    out.push('\n');
    for (k, w) in trace.iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in w {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Some(out)
}
