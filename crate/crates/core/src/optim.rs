//! Rprop, HLS and ESLA as epoch-level state machines.
//!
//! All three share the same skeleton: evaluate the batch gradient, adapt the
//! per-weight stepsizes with the Rprop sign rule, and move every weight by
//! `-tau * eta_i * sign(g_i)`. HLS and ESLA work on a perturbed gradient
//!
//! ```text
//! g~_i = g_i + mu' * w_i / (1 + w_i^2)^2 * Q(T, k)
//! ```
//!
//! which is the exact gradient of `E + (mu'/2) * sum w^2/(1+w^2) * Q(T, k)`,
//! and additionally keep stepsizes from collapsing while the noise factor
//! `Q` is still large. HLS holds `T = T0`; ESLA cools `T` with
//! [`cooled_temperature`](crate::tsallis::cooled_temperature).

use rand::distributions::Open01;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::netcore::{Dataset, Network};
use crate::tsallis::{noise_factor, ScheduleParams, TemperatureMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Rprop,
    Hls,
    Esla,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Rprop, Algorithm::Hls, Algorithm::Esla];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rprop => "rprop",
            Algorithm::Hls => "hls",
            Algorithm::Esla => "esla",
        }
    }

    /// Whether the algorithm trains on the perturbed energy.
    pub fn is_noisy(self) -> bool {
        !matches!(self, Algorithm::Rprop)
    }

    pub fn temperature_mode(self) -> TemperatureMode {
        match self {
            Algorithm::Esla => TemperatureMode::Cooled,
            _ => TemperatureMode::Fixed,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rprop" => Ok(Algorithm::Rprop),
            "hls" => Ok(Algorithm::Hls),
            "esla" => Ok(Algorithm::Esla),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// What happens to a weight whose gradient changed sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RpropVariant {
    /// Shrink the stepsize, forget the gradient, still take the step.
    #[default]
    SignChange,
    /// Shrink the stepsize, revert the previous step and skip this one.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// Initial stepsize of every weight.
    pub delta0: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Strength of the weight-decay noise term (gradient coefficient).
    pub mu_prime: f64,
    /// Stepsize floor coefficient, `0 < rho < 1`.
    pub rho: f64,
    /// Apply the stepsize floor in noisy modes.
    pub floor: bool,
    /// Entropic index.
    pub q: f64,
    /// Initial temperature.
    pub t0: f64,
    pub tau: f64,
    pub max_epochs: u64,
    pub error_target: f64,
    pub variant: RpropVariant,
    /// Keep a snapshot of the parameters after every epoch.
    pub record_weights: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Esla,
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta0: 0.1,
            delta_min: 1e-6,
            delta_max: 50.0,
            mu_prime: 0.01,
            rho: 0.5,
            floor: true,
            q: 1.6,
            t0: 2.0,
            tau: 1.0,
            max_epochs: 2000,
            error_target: 1e-3,
            variant: RpropVariant::SignChange,
            record_weights: false,
        }
    }
}

impl OptimizerConfig {
    pub fn with_algorithm(&self, algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(0.0 < self.eta_minus && self.eta_minus < 1.0 && 1.0 < self.eta_plus) {
            return bad(format!(
                "need 0 < eta_minus < 1 < eta_plus, got {} and {}",
                self.eta_minus, self.eta_plus
            ));
        }
        if !(0.0 < self.delta_min && self.delta_min <= self.delta0 && self.delta0 <= self.delta_max)
        {
            return bad(format!(
                "need 0 < delta_min <= delta0 <= delta_max, got {} / {} / {}",
                self.delta_min, self.delta0, self.delta_max
            ));
        }
        if !(0.0 < self.rho && self.rho < 1.0) {
            return bad(format!("rho must lie in (0, 1), got {}", self.rho));
        }
        if !(self.mu_prime >= 0.0) || !self.mu_prime.is_finite() {
            return bad(format!(
                "mu' must be finite and >= 0, got {}",
                self.mu_prime
            ));
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.error_target.is_nan() {
            return bad("error target is NaN".into());
        }
        self.schedule().map(|_| ())
    }

    pub fn schedule(&self) -> Result<ScheduleParams> {
        ScheduleParams::new(self.q, self.t0, self.algorithm.temperature_mode())
    }
}

/// Trial-private optimizer state.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    /// Per-weight stepsizes, always within `[delta_min, delta_max]`.
    pub eta: Vec<f64>,
    pub prev_grad: Vec<f64>,
    /// Last applied weight change, used by [`RpropVariant::Backtracking`].
    pub prev_step: Vec<f64>,
    /// Weights whose gradient flipped sign this epoch.
    pub flipped: Vec<bool>,
    /// Current epoch.
    pub k: u64,
    pub temperature: f64,
    pub rng: ChaCha8Rng,
}

impl OptimizerState {
    pub fn new(dim: usize, cfg: &OptimizerConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // keep this stream apart from the one used for weight initialization
        rng.set_stream(1);
        Self {
            eta: vec![cfg.delta0; dim],
            prev_grad: vec![0.0; dim],
            prev_step: vec![0.0; dim],
            flipped: vec![false; dim],
            k: 0,
            temperature: cfg.t0,
            rng,
        }
    }
}

/// `sum_i w_i^2 / (1 + w_i^2)` over all parameters.
pub fn decay_bias(params: &[f64]) -> f64 {
    params.iter().map(|w| w * w / (1.0 + w * w)).sum()
}

/// Noise term added to the energy: `(mu'/2) * decay_bias * Q`.
pub fn perturbation_energy(params: &[f64], mu_prime: f64, noise: f64) -> f64 {
    0.5 * mu_prime * decay_bias(params) * noise
}

/// Adds `mu' * w_i / (1 + w_i^2)^2 * Q` to every gradient component.
pub fn add_perturbation_gradient(params: &[f64], grad: &mut [f64], mu_prime: f64, noise: f64) {
    for (g, &w) in grad.iter_mut().zip(params) {
        let d = 1.0 + w * w;
        *g += mu_prime * w / (d * d) * noise;
    }
}

/// Perturbed energy of a network at epoch `k` and temperature `temperature`.
pub fn perturbed_energy(
    net: &Network,
    data: &Dataset,
    cfg: &OptimizerConfig,
    k: u64,
    temperature: f64,
) -> Result<f64> {
    let e = net.energy(data)?;
    let noise = noise_factor(temperature, k, cfg.q);
    Ok(e + perturbation_energy(net.params(), cfg.mu_prime, noise))
}

/// Exact gradient of [`perturbed_energy`].
pub fn perturbed_gradient(
    net: &Network,
    data: &Dataset,
    cfg: &OptimizerConfig,
    k: u64,
    temperature: f64,
) -> Result<Vec<f64>> {
    let mut g = net.gradient(data)?;
    let noise = noise_factor(temperature, k, cfg.q);
    add_perturbation_gradient(net.params(), &mut g, cfg.mu_prime, noise);
    Ok(g)
}

/// Rprop stepsize adaptation from the sign agreement of consecutive
/// gradients. A sign change shrinks the stepsize and zeroes the remembered
/// gradient so the next epoch does not adapt that weight again.
pub fn rprop_adapt(state: &mut OptimizerState, grad: &[f64], cfg: &OptimizerConfig) {
    for i in 0..grad.len() {
        let product = grad[i] * state.prev_grad[i];
        state.flipped[i] = false;
        if product > 0.0 {
            state.eta[i] = (state.eta[i] * cfg.eta_plus).min(cfg.delta_max);
            state.prev_grad[i] = grad[i];
        } else if product < 0.0 {
            state.eta[i] = (state.eta[i] * cfg.eta_minus).max(cfg.delta_min);
            state.prev_grad[i] = 0.0;
            state.flipped[i] = true;
        } else {
            state.prev_grad[i] = grad[i];
        }
    }
}

/// Lifts stepsizes that fell below `rho * Q^2`:
/// `eta_i = max(eta_i * eta_minus + 2 c rho Q^2, delta_min)` with a fresh
/// `c ~ U(0, 1)` per weight.
///
/// One `c` is drawn for every weight each call, whether or not the
/// condition holds, so the random stream advances identically.
pub fn stepsize_floor(state: &mut OptimizerState, cfg: &OptimizerConfig, noise: f64) {
    let threshold = cfg.rho * noise * noise;
    for eta in state.eta.iter_mut() {
        let c: f64 = state.rng.sample(Open01);
        if *eta < threshold {
            let lifted = *eta * cfg.eta_minus + 2.0 * c * threshold;
            *eta = lifted.max(cfg.delta_min).min(cfg.delta_max);
        }
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `w_i <- w_i - tau * eta_i * sign(g_i)`, with `sign(0) = 0`.
pub fn apply_update(
    params: &mut [f64],
    state: &mut OptimizerState,
    grad: &[f64],
    cfg: &OptimizerConfig,
) {
    for i in 0..params.len() {
        let step = if cfg.variant == RpropVariant::Backtracking && state.flipped[i] {
            -state.prev_step[i]
        } else {
            -cfg.tau * state.eta[i] * sign(grad[i])
        };
        params[i] += step;
        state.prev_step[i] = if state.flipped[i] && cfg.variant == RpropVariant::Backtracking {
            0.0
        } else {
            step
        };
    }
}

/// Anything the optimizers can minimize over a flat parameter vector.
pub trait Objective {
    fn dim(&self) -> usize;

    fn energy(&mut self, params: &[f64]) -> Result<f64>;

    /// Writes the gradient into `grad` and returns the energy.
    fn energy_and_gradient(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64>;
}

/// Batch energy of a network on a fixed dataset.
pub struct NetworkObjective<'a> {
    net: Network,
    data: &'a Dataset,
}

impl<'a> NetworkObjective<'a> {
    pub fn new(net: Network, data: &'a Dataset) -> Self {
        Self { net, data }
    }
}

impl Objective for NetworkObjective<'_> {
    fn dim(&self) -> usize {
        self.net.param_count()
    }

    fn energy(&mut self, params: &[f64]) -> Result<f64> {
        self.net.params_mut().copy_from_slice(params);
        self.net.energy(self.data)
    }

    fn energy_and_gradient(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.net.params_mut().copy_from_slice(params);
        self.net.energy_and_gradient(self.data, grad)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Epochs evaluated. On convergence this is the epoch whose energy met
    /// the target; otherwise `max_epochs`.
    pub epochs_run: u64,
    pub converged: bool,
    /// Unperturbed energy at the final parameters.
    pub final_energy: f64,
    /// Unperturbed energy at the start of every epoch.
    pub energy_trace: Vec<f64>,
    /// Initial parameters followed by the parameters after every update.
    pub weight_trace: Option<Vec<Vec<f64>>>,
    /// Why the trial was aborted, if it was.
    pub abort: Option<String>,
}

/// Runs the epoch loop on `params` in place.
///
/// Epoch `k` evaluates the unperturbed energy and its gradient at the
/// current weights and stops if the energy meets `error_target`. Otherwise
/// it builds the update direction (perturbed for HLS/ESLA), adapts the
/// stepsizes, applies the floor and moves the weights.
pub fn minimize<O: Objective>(
    objective: &mut O,
    params: &mut [f64],
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<TrainReport> {
    cfg.validate()?;
    if params.len() != objective.dim() {
        return Err(Error::Dimension {
            what: "parameter vector",
            expected: objective.dim(),
            actual: params.len(),
        });
    }
    let schedule = cfg.schedule()?;
    let noisy = cfg.algorithm.is_noisy();
    let mut state = OptimizerState::new(params.len(), cfg, seed);
    let mut grad = vec![0.0; params.len()];
    let mut trace = Vec::new();
    let mut weights = cfg.record_weights.then(|| vec![params.to_vec()]);

    for k in 1..=cfg.max_epochs {
        state.k = k;
        let energy = objective.energy_and_gradient(params, &mut grad)?;
        if !energy.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Ok(TrainReport {
                epochs_run: k,
                converged: false,
                final_energy: energy,
                energy_trace: trace,
                weight_trace: weights,
                abort: Some(format!("non-finite energy or gradient at epoch {k}")),
            });
        }
        trace.push(energy);
        if energy <= cfg.error_target {
            return Ok(TrainReport {
                epochs_run: k,
                converged: true,
                final_energy: energy,
                energy_trace: trace,
                weight_trace: weights,
                abort: None,
            });
        }

        let mut noise = 0.0;
        if noisy {
            let (t, q) = schedule.noise(k);
            state.temperature = t;
            noise = q;
            if cfg.mu_prime != 0.0 {
                add_perturbation_gradient(params, &mut grad, cfg.mu_prime, noise);
            }
        }
        rprop_adapt(&mut state, &grad, cfg);
        if noisy && cfg.floor {
            stepsize_floor(&mut state, cfg, noise);
        }
        apply_update(params, &mut state, &grad, cfg);
        if let Some(w) = weights.as_mut() {
            w.push(params.to_vec());
        }
    }

    let final_energy = objective.energy(params)?;
    let abort = (!final_energy.is_finite()).then(|| "non-finite final energy".to_string());
    Ok(TrainReport {
        epochs_run: cfg.max_epochs,
        converged: false,
        final_energy,
        energy_trace: trace,
        weight_trace: weights,
        abort,
    })
}

/// Trains a copy of `net` on `data`; returns the trained network and the
/// report. Deterministic in `(net, data, cfg, seed)`.
pub fn train(
    net: &Network,
    data: &Dataset,
    cfg: &OptimizerConfig,
    seed: u64,
) -> Result<(Network, TrainReport)> {
    // surface shape errors before the loop
    net.energy(data)?;
    let mut params = net.params().to_vec();
    let mut objective = NetworkObjective::new(net.clone(), data);
    let report = minimize(&mut objective, &mut params, cfg, seed)?;
    let trained = if params.iter().all(|p| p.is_finite()) {
        Network::from_params(net.topology().clone(), params)?
    } else {
        net.clone()
    };
    Ok((trained, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{Activation, Pattern, Topology};

    fn cfg(algorithm: Algorithm) -> OptimizerConfig {
        OptimizerConfig {
            algorithm,
            ..OptimizerConfig::default()
        }
    }

    fn state_with(eta: Vec<f64>, prev: Vec<f64>) -> OptimizerState {
        let mut s = OptimizerState::new(eta.len(), &OptimizerConfig::default(), 0);
        s.eta = eta;
        s.prev_grad = prev;
        s
    }

    #[test]
    fn decay_bias_values() {
        assert_eq!(decay_bias(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(decay_bias(&[1.0]), 0.5);
        let w = [3.0, -2.0, 100.0, 0.1];
        assert!(decay_bias(&w) < w.len() as f64);
    }

    #[test]
    fn adapt_follows_sign_agreement() {
        let c = OptimizerConfig::default();
        let mut s = state_with(vec![0.1, 0.1, 50.0, 0.1], vec![1.0, 1.0, 1.0, 0.0]);
        rprop_adapt(&mut s, &[2.0, -2.0, 3.0, 5.0], &c);
        assert!((s.eta[0] - 0.12).abs() < 1e-15);
        assert_eq!(s.eta[1], 0.05);
        assert_eq!(s.eta[2], 50.0);
        assert_eq!(s.eta[3], 0.1);
        assert_eq!(s.prev_grad, vec![2.0, 0.0, 3.0, 5.0]);
        assert_eq!(s.flipped, vec![false, true, false, false]);
    }

    #[test]
    fn floor_arithmetic() {
        let c = OptimizerConfig {
            rho: 0.5,
            eta_minus: 0.5,
            ..OptimizerConfig::default()
        };
        let mut s = state_with(vec![1e-4, 1.0], vec![0.0, 0.0]);
        let mut replay = s.rng.clone();
        stepsize_floor(&mut s, &c, 0.1);
        let c0: f64 = replay.sample(Open01);
        let threshold = 0.5 * 0.1 * 0.1;
        let expected = (1e-4 * 0.5 + 2.0 * c0 * threshold).max(1e-6);
        assert_eq!(s.eta[0], expected);
        assert_eq!(s.eta[1], 1.0);

        // the worked example with c = 0.5
        let lifted: f64 = (1e-4 * 0.5 + 2.0 * 0.5 * 0.5 * 0.01f64).max(1e-6);
        assert!((lifted - 5.05e-3).abs() < 1e-15);

        // late epochs: Q ~ 0 disables the floor
        let mut late = state_with(vec![1e-5], vec![0.0]);
        stepsize_floor(&mut late, &c, 1e-6);
        assert_eq!(late.eta[0], 1e-5);
    }

    #[test]
    fn update_is_sign_based() {
        let c = OptimizerConfig::default();
        let mut s = state_with(vec![0.1, 0.2], vec![0.0, 0.0]);
        let mut w = vec![1.0, -2.0];
        apply_update(&mut w, &mut s, &[0.3, -0.5], &c);
        assert!((w[0] - 0.9).abs() < 1e-15 && (w[1] + 1.8).abs() < 1e-15);

        let mut a = vec![1.0, -2.0];
        let mut b = a.clone();
        apply_update(&mut a, &mut s.clone(), &[0.3, -0.5], &c);
        apply_update(&mut b, &mut s.clone(), &[30.0, -50.0], &c);
        assert_eq!(a, b);

        let mut z = vec![1.0, -2.0];
        apply_update(&mut z, &mut s, &[0.0, 0.0], &c);
        assert_eq!(z, vec![1.0, -2.0]);
    }

    #[test]
    fn backtracking_reverts_previous_step() {
        let c = OptimizerConfig {
            variant: RpropVariant::Backtracking,
            ..OptimizerConfig::default()
        };
        let mut s = state_with(vec![0.1], vec![0.0]);
        let mut w = vec![1.0];
        rprop_adapt(&mut s, &[1.0], &c);
        apply_update(&mut w, &mut s, &[1.0], &c);
        assert!((w[0] - 0.9).abs() < 1e-15);
        rprop_adapt(&mut s, &[-1.0], &c);
        apply_update(&mut w, &mut s, &[-1.0], &c);
        assert!((w[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.eta[0], 0.05);
    }

    #[test]
    fn perturbation_switches_off() {
        let topo = Topology::uniform(vec![2, 2, 1], Activation::Tansig).unwrap();
        let net = Network::init_weights(topo, 3, 0.5).unwrap();
        let data = Dataset::new(vec![
            Pattern::new(vec![1.0, -1.0], vec![1.0]),
            Pattern::new(vec![-1.0, -1.0], vec![-1.0]),
        ])
        .unwrap();
        let off = OptimizerConfig {
            mu_prime: 0.0,
            ..cfg(Algorithm::Hls)
        };
        assert_eq!(
            perturbed_energy(&net, &data, &off, 3, 2.0).unwrap(),
            net.energy(&data).unwrap()
        );
        assert_eq!(
            perturbed_gradient(&net, &data, &off, 3, 2.0).unwrap(),
            net.gradient(&data).unwrap()
        );

        // with q > 1 the noise fades: Q(2, 10^12) is ~1e-6 at q = 1.6
        let on = cfg(Algorithm::Hls);
        let far = perturbed_energy(&net, &data, &on, 1_000_000_000_000, 2.0).unwrap();
        assert!((far - net.energy(&data).unwrap()).abs() < 1e-7);

        let mut g = vec![0.0, 0.0];
        add_perturbation_gradient(&[0.0, 1.0], &mut g, 0.01, 1.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.01 / 4.0);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad_rho = OptimizerConfig {
            rho: 1.0,
            ..OptimizerConfig::default()
        };
        assert!(bad_rho.validate().is_err());
        let esla_q1 = OptimizerConfig {
            q: 1.0,
            ..cfg(Algorithm::Esla)
        };
        assert!(esla_q1.validate().is_err());
        assert!(esla_q1.with_algorithm(Algorithm::Hls).validate().is_ok());
        let bad_eta = OptimizerConfig {
            eta_plus: 0.9,
            ..OptimizerConfig::default()
        };
        assert!(bad_eta.validate().is_err());
    }

    #[test]
    fn loose_target_converges_immediately() {
        let topo = Topology::uniform(vec![2, 2, 1], Activation::Tansig).unwrap();
        let net = Network::init_weights(topo, 1, 0.5).unwrap();
        let data = Dataset::new(vec![Pattern::new(vec![1.0, 1.0], vec![-1.0])]).unwrap();
        for alg in Algorithm::ALL {
            let c = OptimizerConfig {
                error_target: f64::INFINITY,
                q: 2.1,
                ..cfg(alg)
            };
            let (_, r) = train(&net, &data, &c, 9).unwrap();
            assert!(r.converged);
            assert_eq!(r.epochs_run, 1);
        }
    }
}
