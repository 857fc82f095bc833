//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Criterion 8 needs the PROBEN1 `diabetes1.dt` file; point
//! `ESLA_DIABETES1` at it to enable it. `ESLA_ACCEPTANCE_FULL=1` runs it
//! with 300 trials instead of 30.

#![allow(clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use esla::data::{gen_boolean, load_proben1, BooleanEncoding, BooleanProblem};
use esla::eval::{
    landscape_config, landscape_trace, performance, preset, run_benchmark, summarize,
    wilcoxon_signed_rank, AlgorithmSummary, BasinMap, BenchmarkSummary, Problem, ThreeBasin,
    THREE_BASIN_SEEDS, THREE_BASIN_START,
};
use esla::netcore::{Activation, Dataset, Network, Pattern, Topology};
use esla::optim::{perturbed_energy, perturbed_gradient, train, Algorithm, OptimizerConfig};
use esla::tsallis::{cooled_temperature, noise_factor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}
use Outcome::*;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s = norm(a).max(norm(b));
    if s == 0.0 {
        0.0
    } else {
        norm(&d) / s
    }
}

fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-6;
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn gradient_consistency() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let topologies = [
        Topology::parse("2-2-1", Activation::Tansig).unwrap(),
        Topology::parse("3-3-1", Activation::Tansig).unwrap(),
        Topology::parse("8-2-2-2", Activation::Logistic).unwrap(),
    ];
    let (mut worst_plain, mut worst_perturbed) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let topo = &topologies[i % 3];
        let lo = if topo.output_activation() == Activation::Logistic {
            0.0
        } else {
            -1.0
        };
        let rows = (0..6)
            .map(|_| {
                Pattern::new(
                    (0..topo.inputs())
                        .map(|_| r.gen_range(-1.0..=1.0))
                        .collect(),
                    (0..topo.outputs()).map(|_| r.gen_range(lo..=1.0)).collect(),
                )
            })
            .collect();
        let data = Dataset::new(rows).unwrap();
        let params: Vec<f64> = (0..topo.param_count())
            .map(|_| r.gen_range(-1.5..=1.5))
            .collect();
        let net = Network::from_params(topo.clone(), params).unwrap();
        let at = |p: &[f64]| Network::from_params(topo.clone(), p.to_vec()).unwrap();

        let plain = central_diff(|p| at(p).energy(&data).unwrap(), net.params());
        worst_plain = worst_plain.max(rel_err(&net.gradient(&data).unwrap(), &plain));

        let cfg = OptimizerConfig {
            q: [1.1, 1.6, 2.1][i % 3],
            mu_prime: 0.01 + 0.1 * r.gen::<f64>(),
            ..OptimizerConfig::default()
        };
        let k = r.gen_range(1..100);
        let t = r.gen_range(0.5..2.0);
        let numeric = central_diff(
            |p| perturbed_energy(&at(p), &data, &cfg, k, t).unwrap(),
            net.params(),
        );
        let analytic = perturbed_gradient(&net, &data, &cfg, k, t).unwrap();
        worst_perturbed = worst_perturbed.max(rel_err(&analytic, &numeric));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_plain <= 1e-6 && worst_perturbed <= 1e-5 && secs < 10.0,
        format!(
            "max rel err backprop {worst_plain:.1e}, perturbed {worst_perturbed:.1e}, {secs:.2}s"
        ),
    )
}

fn schedule_properties() -> Outcome {
    let mut problems = Vec::new();
    for q in [1.1, 1.6, 1.7, 2.1] {
        if noise_factor(2.0, 0, q) != 1.0 {
            problems.push(format!("Q(2,0) != 1 at q={q}"));
        }
        let mut prev = 1.0;
        for k in 1..=10_000u64 {
            let v = noise_factor(2.0, k, q);
            if !(v < prev) {
                problems.push(format!("Q not decreasing at q={q} k={k}"));
                break;
            }
            prev = v;
        }
        if cooled_temperature(2.0, q, 1).unwrap() != 2.0 {
            problems.push(format!("T(1) != 2 at q={q}"));
        }
    }
    let worst_limit = (0..=10u64)
        .map(|k| (noise_factor(2.0, k, 1.0 + 1e-8) - 2f64.powi(-2 * k as i32)).abs())
        .fold(0.0, f64::max);
    if worst_limit > 1e-5 {
        problems.push(format!("q->1 limit off by {worst_limit:e}"));
    }
    let ratio = |q: f64| {
        let k = 10_000u64;
        cooled_temperature(2.0, q, k).unwrap() * (k as f64).powf(q - 1.0)
            / (2.0 * (2f64.powf(q - 1.0) - 1.0))
    };
    // the asymptote is approached like 1 + k^(1-q); checked where that is small
    let mut asym = Vec::new();
    for q in [1.6, 1.7, 2.1] {
        let r = ratio(q);
        asym.push(format!("q={q}: {r:.4}"));
        if (r - 1.0).abs() >= 0.01 {
            problems.push(format!("T(k) k^(q-1) ratio {r} at q={q}"));
        }
    }
    let detail = format!(
        "q->1 limit err {worst_limit:.1e}; T(1e4) k^(q-1) / limit {} (q=1.1: {:.3}, not yet asymptotic)",
        asym.join(", "),
        ratio(1.1)
    );
    if problems.is_empty() {
        Pass(detail)
    } else {
        Fail(format!("{}; {detail}", problems.join("; ")))
    }
}

fn xor_cfg(algorithm: Algorithm, epochs: u64) -> OptimizerConfig {
    OptimizerConfig {
        algorithm,
        q: 2.1,
        max_epochs: epochs,
        error_target: f64::NEG_INFINITY,
        record_weights: true,
        ..OptimizerConfig::default()
    }
}

fn reduction_identities() -> Outcome {
    let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
    let topo = Topology::parse("2-2-1", Activation::Tansig).unwrap();
    let mut identical = 0;
    let mut first_epoch = 0;
    for seed in 0..10u64 {
        let net = Network::init_weights(topo.clone(), seed, 0.5).unwrap();
        let stripped = OptimizerConfig {
            mu_prime: 0.0,
            floor: false,
            ..xor_cfg(Algorithm::Esla, 100)
        };
        let a = train(&net, &data, &xor_cfg(Algorithm::Rprop, 100), seed)
            .unwrap()
            .1;
        let b = train(&net, &data, &stripped, seed).unwrap().1;
        if a.weight_trace == b.weight_trace && a.energy_trace == b.energy_trace {
            identical += 1;
        }
        let h = train(&net, &data, &xor_cfg(Algorithm::Hls, 1), seed)
            .unwrap()
            .0;
        let e = train(&net, &data, &xor_cfg(Algorithm::Esla, 1), seed)
            .unwrap()
            .0;
        if h.params() == e.params() {
            first_epoch += 1;
        }
    }
    verdict(
        identical == 10 && first_epoch == 10,
        format!("ESLA(mu'=0, no floor) == Rprop on {identical}/10 seeds; HLS == ESLA at epoch 1 on {first_epoch}/10"),
    )
}

fn enumeration_p(d: &[f64]) -> f64 {
    let d: Vec<f64> = d.iter().copied().filter(|v| *v != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|v| {
            let below = abs.iter().filter(|w| *w < v).count() as f64;
            let eq = abs.iter().filter(|w| *w == v).count() as f64;
            below + (eq + 1.0) / 2.0
        })
        .collect();
    let n = d.len();
    let plus: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let s = plus.min(ranks.iter().sum::<f64>() - plus);
    let low = (0u64..1 << n)
        .filter(|m| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| ranks[i])
                .sum::<f64>()
                <= s + 1e-9
        })
        .count();
    (2.0 * low as f64 / (1u64 << n) as f64).min(1.0)
}

fn wilcoxon_oracle() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut samples = 0;
    while samples < 100 {
        let n = r.gen_range(5..=12);
        let a: Vec<f64> = (0..n).map(|_| f64::from(r.gen_range(0..10u8))).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(r.gen_range(0..10u8))).collect();
        let Ok(res) = wilcoxon_signed_rank(&a, &b) else {
            continue;
        };
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        worst = worst.max((res.p_value - enumeration_p(&d)).abs());
        samples += 1;
    }
    let a: Vec<f64> = (1..=10).map(f64::from).collect();
    let extreme = wilcoxon_signed_rank(&a, &[0.0; 10]).unwrap().p_value;
    let oracle = enumeration_p(&a);
    verdict(
        worst < 1e-12 && (extreme - oracle).abs() < 1e-12 && (oracle - 0.001953125).abs() < 1e-12,
        format!(
            "max |exact - enumeration| {worst:.1e} over 100 samples; n=10 same-sign p={extreme}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    for jobs in ["1", "8"] {
        let out = format!("jobs{jobs}");
        let status = Command::new(env!("CARGO_BIN_EXE_esla"))
            .args([
                "bench",
                "--problem",
                "xor",
                "--trials",
                "20",
                "--seed",
                "11",
                "--jobs",
                jobs,
                "--out",
                &out,
            ])
            .current_dir(dir.path())
            .output()
            .unwrap();
        if !status.status.success() {
            return Fail(format!(
                "bench --jobs {jobs} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            ));
        }
    }
    let files = ["results.csv", "summary.csv", "summary.txt"];
    let same = files.iter().all(|f| {
        let a = std::fs::read(dir.path().join("jobs1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("jobs8").join(f)).unwrap();
        a == b
    });
    verdict(
        same,
        format!(
            "{} byte-identical for --jobs 1 and 8 (20 trials)",
            files.join(", ")
        ),
    )
}

fn row(summary: &BenchmarkSummary, alg: Algorithm) -> &AlgorithmSummary {
    summary.rows.iter().find(|r| r.algorithm == alg).unwrap()
}

fn describe(summary: &BenchmarkSummary) -> String {
    summary
        .rows
        .iter()
        .map(|r| {
            format!(
                "{} {:.1}% conv, {} epochs",
                r.algorithm,
                r.convergence_pct,
                r.mean_epochs.map_or("-".into(), |e| format!("{e:.0}"))
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn boolean_bench(name: &str, problem: BooleanProblem) -> BenchmarkSummary {
    let p = preset(name).unwrap();
    let prob = Problem::boolean(problem, p.topology(), BooleanEncoding::Bipolar);
    let base = OptimizerConfig {
        q: p.q,
        t0: p.t0,
        error_target: p.error_target,
        max_epochs: 2000,
        ..OptimizerConfig::default()
    };
    let configs: Vec<_> = Algorithm::ALL
        .iter()
        .map(|&a| base.with_algorithm(a))
        .collect();
    let results = run_benchmark(&prob, &configs, 300, 0, None).unwrap();
    summarize(&results).unwrap()
}

fn epochs(r: &AlgorithmSummary) -> f64 {
    r.mean_epochs.unwrap_or(f64::INFINITY)
}

fn xor_reproduction() -> Outcome {
    let s = boolean_bench("xor", BooleanProblem::Xor);
    let (esla, rprop) = (row(&s, Algorithm::Esla), row(&s, Algorithm::Rprop));
    verdict(
        esla.convergence_pct >= 50.0 && epochs(esla) < epochs(rprop),
        format!(
            "{} (need ESLA conv >= 50% and ESLA epochs < Rprop)",
            describe(&s)
        ),
    )
}

fn parity_reproduction() -> Outcome {
    let s = boolean_bench("parity3", BooleanProblem::Parity3);
    let (esla, hls, rprop) = (
        row(&s, Algorithm::Esla),
        row(&s, Algorithm::Hls),
        row(&s, Algorithm::Rprop),
    );
    verdict(
        esla.convergence_pct >= hls.convergence_pct
            && hls.convergence_pct >= rprop.convergence_pct
            && epochs(esla) < epochs(rprop),
        format!(
            "{} (need conv ESLA >= HLS >= Rprop and ESLA epochs < Rprop)",
            describe(&s)
        ),
    )
}

fn diabetes_reproduction() -> Outcome {
    let Ok(path) = std::env::var("ESLA_DIABETES1") else {
        return Skip("set ESLA_DIABETES1 to a PROBEN1 diabetes1.dt file".into());
    };
    let trials = if std::env::var("ESLA_ACCEPTANCE_FULL").as_deref() == Ok("1") {
        300
    } else {
        30
    };
    let (_, data, plan) = match load_proben1(Path::new(&path)) {
        Ok(x) => x,
        Err(e) => return Fail(format!("cannot load {path}: {e}")),
    };
    let p = preset("diabetes").unwrap();
    let prob = Problem::holdout("diabetes", p.topology(), &data, &plan).unwrap();
    let base = OptimizerConfig {
        q: p.q,
        t0: p.t0,
        error_target: p.error_target,
        ..OptimizerConfig::default()
    };
    let configs: Vec<_> = [Algorithm::Rprop, Algorithm::Esla]
        .iter()
        .map(|&a| base.with_algorithm(a))
        .collect();
    let s = summarize(&run_benchmark(&prob, &configs, trials, 0, None).unwrap()).unwrap();
    let (esla, rprop) = (row(&s, Algorithm::Esla), row(&s, Algorithm::Rprop));
    let gen = esla.mean_generalization.unwrap_or(0.0);
    verdict(
        epochs(esla) < epochs(rprop) && (gen - 76.2).abs() <= 5.0,
        format!("{trials} trials: {}; ESLA generalization {gen:.1}% (need epochs ESLA < Rprop, gen 76.2 +- 5)", describe(&s)),
    )
}

fn performance_metric() -> Outcome {
    // (convergence, generalization) of Rprop, HLS, ESLA and the reported
    // performance row
    let tables: [(&str, [(f64, f64); 3], [f64; 3]); 6] = [
        (
            "diabetes",
            [(86.0, 75.2), (94.0, 75.8), (95.0, 76.2)],
            [64.7, 71.2, 72.4],
        ),
        (
            "cancer",
            [(94.0, 97.2), (96.0, 97.4), (99.0, 97.4)],
            [91.4, 93.5, 96.4],
        ),
        (
            "thyroid",
            [(81.3, 98.2), (94.0, 98.1), (95.3, 98.0)],
            [79.8, 92.3, 93.6],
        ),
        (
            "yeast",
            [(98.0, 61.6), (100.0, 61.4), (100.0, 61.5)],
            [60.3, 61.4, 61.5],
        ),
        (
            "xor",
            [(59.0, 100.0), (68.0, 100.0), (64.0, 100.0)],
            [59.0, 68.0, 64.0],
        ),
        (
            "parity3",
            [(74.0, 100.0), (78.0, 100.0), (81.0, 100.0)],
            [74.0, 78.0, 81.0],
        ),
    ];
    let round1 = |x: f64| (x * 10.0).round() / 10.0;
    let headline = round1(performance(95.0, 76.2).unwrap()) == 72.4;
    let mut mismatches = Vec::new();
    for (name, inputs, reported) in tables {
        for (alg, ((c, g), want)) in ["rprop", "hls", "esla"]
            .iter()
            .zip(inputs.iter().zip(reported))
        {
            let got = performance(*c, *g).unwrap();
            if round1(got) != want {
                mismatches.push(format!("{name}/{alg} {got:.3} vs {want}"));
            }
        }
    }
    let detail = if mismatches.is_empty() {
        "performance(95, 76.2) = 72.4; all 18 cells recompute".to_string()
    } else {
        format!(
            "performance(95, 76.2) rounds to 72.4: {headline}; cells that do not recompute: {}",
            mismatches.join(", ")
        )
    };
    verdict(headline && mismatches.is_empty(), detail)
}

fn landscape_behaviour() -> Outcome {
    let mut f = ThreeBasin::default();
    let map = BasinMap::three_basin(&f);
    let configs = [
        landscape_config(Algorithm::Rprop),
        landscape_config(Algorithm::Esla),
    ];
    let (mut rprop_local, mut esla_global, mut n) = (0, 0, 0);
    for seed in THREE_BASIN_SEEDS {
        let t = landscape_trace(&mut f, THREE_BASIN_START, &configs, seed).unwrap();
        n += 1;
        if matches!(map.basin_of(t[0].end()), Some(b) if b != 0) {
            rprop_local += 1;
        }
        if map.basin_of(t[1].end()) == Some(0) {
            esla_global += 1;
        }
    }
    verdict(
        rprop_local == n && esla_global * 10 >= n * 8,
        format!(
            "start ({}, {}): Rprop in a local basin {rprop_local}/{n}, ESLA in the global basin {esla_global}/{n}",
            THREE_BASIN_START[0], THREE_BASIN_START[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gradient consistency", gradient_consistency),
        ("schedule properties", schedule_properties),
        ("reduction identities", reduction_identities),
        ("wilcoxon oracle", wilcoxon_oracle),
        ("determinism", determinism),
        ("xor reproduction", xor_reproduction),
        ("parity-3 reproduction", parity_reproduction),
        ("diabetes reproduction", diabetes_reproduction),
        ("performance metric", performance_metric),
        ("landscape", landscape_behaviour),
    ];
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Pass(d) => {
                pass += 1;
                ("PASS", d)
            }
            Fail(d) => {
                fail += 1;
                ("FAIL", d)
            }
            Skip(d) => {
                skip += 1;
                ("SKIP", d)
            }
        };
        println!("criterion {:>2} {:<22} {tag}  {detail}", i + 1, name);
    }
    println!("acceptance: {pass} passed, {fail} failed, {skip} skipped");
    if fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
