#![allow(dead_code)]

use esla::netcore::{Activation, Dataset, Network, Pattern, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn topologies() -> Vec<Topology> {
    vec![
        Topology::parse("2-2-1", Activation::Tansig).unwrap(),
        Topology::parse("3-3-1", Activation::Tansig).unwrap(),
        Topology::parse("8-2-2-2", Activation::Logistic).unwrap(),
    ]
}

/// Random inputs in [-1, 1] and targets in the output range.
pub fn random_dataset(topology: &Topology, patterns: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let (lo, hi) = match topology.output_activation() {
        Activation::Logistic => (0.0, 1.0),
        _ => (-1.0, 1.0),
    };
    let rows = (0..patterns)
        .map(|_| {
            Pattern::new(
                (0..topology.inputs())
                    .map(|_| rng.gen_range(-1.0..=1.0))
                    .collect(),
                (0..topology.outputs())
                    .map(|_| rng.gen_range(lo..=hi))
                    .collect(),
            )
        })
        .collect();
    Dataset::new(rows).unwrap()
}

pub fn random_network(topology: &Topology, rng: &mut ChaCha8Rng, range: f64) -> Network {
    let params = (0..topology.param_count())
        .map(|_| rng.gen_range(-range..=range))
        .collect();
    Network::from_params(topology.clone(), params).unwrap()
}

/// `|a - b| / max(|a|, |b|)` over whole vectors (0 when both are zero).
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Central differences of `f` around `x`.
pub fn central_diff(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
