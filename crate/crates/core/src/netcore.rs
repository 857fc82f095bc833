//! Dense feedforward networks: topology, forward pass, batch energy and its
//! backpropagated gradient.
//!
//! All trainable quantities of a [`Network`] live in one flat parameter
//! vector. Connection layer `l` (from node layer `l` to `l + 1`) occupies a
//! contiguous block holding its `fan_in x fan_out` weight matrix in row-major
//! order (`w[i * fan_out + j]` connects input node `i` to output node `j`),
//! followed by its `fan_out` biases. Gradients share this layout, which lets
//! the optimizers treat weights and biases uniformly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Activation applied by a non-input layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// `1 / (1 + e^-x)`
    Logistic,
    /// `tanh(x)`, MATLAB's `tansig`.
    Tansig,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Logistic => 1.0 / (1.0 + (-x).exp()),
            Activation::Tansig => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activation's output `y = apply(x)`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Logistic => y * (1.0 - y),
            Activation::Tansig => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }

    /// Decision threshold used when a single output node encodes two classes.
    pub fn midpoint(self) -> f64 {
        match self {
            Activation::Logistic => 0.5,
            Activation::Tansig | Activation::Linear => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Logistic => "logistic",
            Activation::Tansig => "tansig",
            Activation::Linear => "linear",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "sigmoid" | "logsig" => Ok(Activation::Logistic),
            "tansig" | "tanh" => Ok(Activation::Tansig),
            "linear" | "purelin" | "identity" => Ok(Activation::Linear),
            other => Err(Error::InvalidParameter(format!(
                "unknown activation `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Layer sizes plus the activation of every non-input layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl Topology {
    /// `activations` has one entry per non-input layer.
    pub fn new(layer_sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Topology(format!(
                "need at least 2 layers, got {}",
                layer_sizes.len()
            )));
        }
        if let Some(pos) = layer_sizes.iter().position(|&n| n == 0) {
            return Err(Error::Topology(format!("layer {pos} has zero nodes")));
        }
        if activations.len() != layer_sizes.len() - 1 {
            return Err(Error::Topology(format!(
                "{} activations given for {} non-input layers",
                activations.len(),
                layer_sizes.len() - 1
            )));
        }
        Ok(Self {
            layer_sizes,
            activations,
        })
    }

    /// Same activation on every non-input layer.
    pub fn uniform(layer_sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        let n = layer_sizes.len().saturating_sub(1);
        Self::new(layer_sizes, vec![activation; n])
    }

    /// Parses `8-2-2-2` (or `8x2x2x2`, `8,2,2,2`).
    pub fn parse(spec: &str, activation: Activation) -> Result<Self> {
        let sizes = spec
            .split(['-', 'x', ','])
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Topology(format!("bad layer size `{s}` in `{spec}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(sizes, activation)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn output_activation(&self) -> Activation {
        *self.activations.last().unwrap()
    }

    /// Number of weights plus biases.
    pub fn param_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sizes: Vec<String> = self.layer_sizes.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", sizes.join("-"))
    }
}

/// One input/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

impl Pattern {
    pub fn new(input: Vec<f64>, target: Vec<f64>) -> Self {
        Self { input, target }
    }
}

/// A non-empty collection of patterns with uniform dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    patterns: Vec<Pattern>,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self> {
        let first = patterns.first().ok_or(Error::EmptyDataset)?;
        let (n_in, n_out) = (first.input.len(), first.target.len());
        for p in &patterns {
            if p.input.len() != n_in {
                return Err(Error::Dimension {
                    what: "pattern input",
                    expected: n_in,
                    actual: p.input.len(),
                });
            }
            if p.target.len() != n_out {
                return Err(Error::Dimension {
                    what: "pattern target",
                    expected: n_out,
                    actual: p.target.len(),
                });
            }
        }
        Ok(Self {
            patterns,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.patterns.len() {
            return Err(Error::Dimension {
                what: "class labels",
                expected: self.patterns.len(),
                actual: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Labels each pattern with the index of its largest target component
    /// (or the midpoint rule for single-output targets).
    pub fn with_labels_from_targets(self, midpoint: f64) -> Self {
        let labels = self
            .patterns
            .iter()
            .map(|p| class_of(&p.target, midpoint))
            .collect();
        Self {
            labels: Some(labels),
            ..self
        }
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.patterns[0].input.len()
    }

    pub fn target_dim(&self) -> usize {
        self.patterns[0].target.len()
    }

    /// Subset in the order given by `indices`. Labels follow their patterns.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let patterns = indices.iter().map(|&i| self.patterns[i].clone()).collect();
        let mut out = Self::new(patterns)?;
        if let Some(labels) = &self.labels {
            out.labels = Some(indices.iter().map(|&i| labels[i]).collect());
        }
        Ok(out)
    }
}

/// Winner-take-all class of an output or target vector; lowest index wins
/// ties. Single-component vectors are thresholded at `midpoint`.
pub fn class_of(values: &[f64], midpoint: f64) -> usize {
    if values.len() == 1 {
        return usize::from(values[0] > midpoint);
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-layer node values produced by [`Network::forward`]; index 0 is the
/// input itself.
pub type Activations = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

fn layer_offsets(topology: &Topology) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(topology.layer_sizes.len());
    let mut acc = 0;
    offsets.push(0);
    for w in topology.layer_sizes.windows(2) {
        acc += (w[0] + 1) * w[1];
        offsets.push(acc);
    }
    offsets
}

impl Network {
    /// All parameters zero.
    pub fn zeros(topology: Topology) -> Self {
        let params = vec![0.0; topology.param_count()];
        Self::from_params(topology, params).expect("sized from topology")
    }

    pub fn from_params(topology: Topology, params: Vec<f64>) -> Result<Self> {
        if params.len() != topology.param_count() {
            return Err(Error::Dimension {
                what: "parameter vector",
                expected: topology.param_count(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        let offsets = layer_offsets(&topology);
        Ok(Self {
            topology,
            params,
            offsets,
        })
    }

    /// Weights and biases drawn i.i.d. from `U[-range, range]`.
    ///
    /// The generator is ChaCha8 keyed by `seed`, so a given
    /// `(topology, seed, range)` always produces the same network. This is
    /// what lets several optimizers start from identical initial weights.
    pub fn init_weights(topology: Topology, seed: u64, range: f64) -> Result<Self> {
        if !(range >= 0.0) || !range.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "initialization range must be finite and non-negative, got {range}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..topology.param_count())
            .map(|_| {
                if range == 0.0 {
                    0.0
                } else {
                    rng.gen_range(-range..=range)
                }
            })
            .collect();
        Self::from_params(topology, params)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameters. Callers are responsible for keeping them finite.
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Weight matrix (row-major, fan-in x fan-out) and biases of connection
    /// layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (fan_in, fan_out) = self.fans(l);
        let block = &self.params[self.offsets[l]..self.offsets[l + 1]];
        block.split_at(fan_in * fan_out)
    }

    fn fans(&self, l: usize) -> (usize, usize) {
        let sizes = &self.topology.layer_sizes;
        (sizes[l], sizes[l + 1])
    }

    pub fn layer_count(&self) -> usize {
        self.topology.layer_sizes.len() - 1
    }

    /// Node values of every layer for one input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Activations> {
        if input.len() != self.topology.inputs() {
            return Err(Error::Dimension {
                what: "network input",
                expected: self.topology.inputs(),
                actual: input.len(),
            });
        }
        Ok(self.forward_unchecked(input))
    }

    fn forward_unchecked(&self, input: &[f64]) -> Activations {
        let mut acts = Vec::with_capacity(self.layer_count() + 1);
        acts.push(input.to_vec());
        for l in 0..self.layer_count() {
            let (weights, biases) = self.layer(l);
            let act = self.topology.activations[l];
            let prev = &acts[l];
            let fan_out = biases.len();
            let mut next = biases.to_vec();
            for (i, &x) in prev.iter().enumerate() {
                let row = &weights[i * fan_out..(i + 1) * fan_out];
                for (n, &w) in next.iter_mut().zip(row) {
                    *n += x * w;
                }
            }
            for n in &mut next {
                *n = act.apply(*n);
            }
            acts.push(next);
        }
        acts
    }

    /// Output-layer values for one input.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.pop().unwrap())
    }

    fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.input_dim() != self.topology.inputs() {
            return Err(Error::Dimension {
                what: "dataset inputs",
                expected: self.topology.inputs(),
                actual: data.input_dim(),
            });
        }
        if data.target_dim() != self.topology.outputs() {
            return Err(Error::Dimension {
                what: "dataset targets",
                expected: self.topology.outputs(),
                actual: data.target_dim(),
            });
        }
        Ok(())
    }

    /// Mean squared error over all patterns and output nodes,
    /// `E = 1/(P n_L) sum_p sum_j (y_jp - t_jp)^2`.
    pub fn energy(&self, data: &Dataset) -> Result<f64> {
        self.check_dataset(data)?;
        let mut sum = 0.0;
        for p in data.patterns() {
            let acts = self.forward_unchecked(&p.input);
            let out = acts.last().unwrap();
            sum += out
                .iter()
                .zip(&p.target)
                .map(|(y, t)| (y - t) * (y - t))
                .sum::<f64>();
        }
        Ok(sum / self.normalizer(data))
    }

    fn normalizer(&self, data: &Dataset) -> f64 {
        (data.len() * self.topology.outputs()) as f64
    }

    /// Gradient of [`Network::energy`] with respect to every parameter.
    pub fn gradient(&self, data: &Dataset) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.params.len()];
        self.energy_and_gradient(data, &mut grad)?;
        Ok(grad)
    }

    /// Energy and gradient in one sweep; `grad` is overwritten.
    pub fn energy_and_gradient(&self, data: &Dataset, grad: &mut [f64]) -> Result<f64> {
        self.check_dataset(data)?;
        if grad.len() != self.params.len() {
            return Err(Error::Dimension {
                what: "gradient buffer",
                expected: self.params.len(),
                actual: grad.len(),
            });
        }
        grad.fill(0.0);
        let scale = 2.0 / self.normalizer(data);
        let n_layers = self.layer_count();
        let mut sum = 0.0;
        let mut delta: Vec<f64> = Vec::new();
        let mut prev_delta: Vec<f64> = Vec::new();

        for p in data.patterns() {
            let acts = self.forward_unchecked(&p.input);
            let out = &acts[n_layers];
            let out_act = self.topology.activations[n_layers - 1];
            delta.clear();
            for (y, t) in out.iter().zip(&p.target) {
                let e = y - t;
                sum += e * e;
                delta.push(scale * e * out_act.derivative_from_output(*y));
            }

            for l in (0..n_layers).rev() {
                let (fan_in, fan_out) = self.fans(l);
                let base = self.offsets[l];
                let below = &acts[l];
                for i in 0..fan_in {
                    let x = below[i];
                    let row = &mut grad[base + i * fan_out..base + (i + 1) * fan_out];
                    for (g, d) in row.iter_mut().zip(&delta) {
                        *g += x * d;
                    }
                }
                let bias_grad = &mut grad[base + fan_in * fan_out..self.offsets[l + 1]];
                for (g, d) in bias_grad.iter_mut().zip(&delta) {
                    *g += d;
                }
                if l == 0 {
                    break;
                }
                let (weights, _) = self.layer(l);
                let act = self.topology.activations[l - 1];
                prev_delta.clear();
                for i in 0..fan_in {
                    let row = &weights[i * fan_out..(i + 1) * fan_out];
                    let back: f64 = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                    prev_delta.push(back * act.derivative_from_output(below[i]));
                }
                std::mem::swap(&mut delta, &mut prev_delta);
            }
        }
        Ok(sum / self.normalizer(data))
    }

    /// Classification accuracy in percent. Multi-output networks use
    /// winner-take-all against the target's argmax; single-output networks
    /// threshold output and target at the output activation's midpoint.
    pub fn classify(&self, data: &Dataset) -> Result<f64> {
        self.check_dataset(data)?;
        let mid = self.topology.output_activation().midpoint();
        let correct = data
            .patterns()
            .iter()
            .filter(|p| {
                let out = self.forward_unchecked(&p.input);
                class_of(out.last().unwrap(), mid) == class_of(&p.target, mid)
            })
            .count();
        Ok(100.0 * correct as f64 / data.len() as f64)
    }
}
