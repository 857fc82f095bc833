//! Tsallis-statistics kernel: the q-exponential, nonextensive entropy, the
//! noise schedule `Q(T, k)` and the power-law cooling of the temperature.

use crate::error::{Error, Result};

/// Below this distance from 1 the entropic index is treated as exactly 1
/// and the Boltzmann-Gibbs limits (`exp`, Shannon entropy) are used.
pub const Q_ONE_TOLERANCE: f64 = 1e-9;

fn is_unit(q: f64) -> bool {
    (q - 1.0).abs() < Q_ONE_TOLERANCE
}

/// `e_q^x = [1 + (1 - q) x]^(1 / (1 - q))`.
///
/// Returns `exp(x)` for `q` within [`Q_ONE_TOLERANCE`] of 1 and `0` whenever
/// the base `1 + (1 - q) x` is not positive (Tsallis cutoff), so the function
/// is total.
pub fn q_exponential(x: f64, q: f64) -> f64 {
    if is_unit(q) {
        return x.exp();
    }
    let one_minus_q = 1.0 - q;
    let shift = one_minus_q * x;
    if 1.0 + shift <= 0.0 {
        return 0.0;
    }
    (shift.ln_1p() / one_minus_q).exp()
}

/// A discrete distribution whose entries lie in `[0, 1]` and sum to 1
/// within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("empty probability vector".into()));
        }
        if let Some(p) = entries.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self(entries))
    }

    pub fn uniform(states: usize) -> Result<Self> {
        if states == 0 {
            return Err(Error::InvalidParameter("zero states".into()));
        }
        Ok(Self(vec![1.0 / states as f64; states]))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }
}

/// `S_q = K (1 - sum p_i^q) / (q - 1)`, with the Shannon limit
/// `-K sum p_i ln p_i` (and `0 ln 0 = 0`) at `q = 1`.
pub fn tsallis_entropy(p: &ProbabilityVector, q: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "K must be positive, got {k}"
        )));
    }
    let p = p.entries();
    if is_unit(q) {
        let h: f64 = p
            .iter()
            .filter(|&&pi| pi > 0.0)
            .map(|&pi| -pi * pi.ln())
            .sum();
        return Ok(k * h);
    }
    let sum: f64 = p.iter().filter(|&&pi| pi > 0.0).map(|&pi| pi.powf(q)).sum();
    Ok(k * (1.0 - sum) / (q - 1.0))
}

/// Noise schedule `Q(T, k) = e_q^(-T ln2 k)`.
///
/// For `q > 1` this decays from `Q(T, 0) = 1` as a power law in `k`; at
/// `q = 1` it collapses to `2^(-T k)`.
pub fn noise_factor(temperature: f64, k: u64, q: f64) -> f64 {
    q_exponential(-temperature * std::f64::consts::LN_2 * k as f64, q)
}

/// Power-law cooling `T = T0 (2^(q-1) - 1) / ((1 + k)^(q-1) - 1)`.
///
/// Only defined for `q > 1` and `k >= 1`; `T(1) = T0` exactly.
pub fn cooled_temperature(t0: f64, q: f64, k: u64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cooling needs q > 1, got {q}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParameter(
            "cooling is undefined at k = 0".into(),
        ));
    }
    if !(t0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "T0 must be positive, got {t0}"
        )));
    }
    let e = q - 1.0;
    // exp_m1 keeps the ratio accurate for q close to 1
    let num = (e * std::f64::consts::LN_2).exp_m1();
    let den = (e * (1.0 + k as f64).ln()).exp_m1();
    Ok(t0 * (num / den))
}

/// How the temperature evolves over epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemperatureMode {
    /// `T = T0` throughout.
    Fixed,
    /// `T = cooled_temperature(T0, q, k)`.
    Cooled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub q: f64,
    pub t0: f64,
    pub mode: TemperatureMode,
}

impl ScheduleParams {
    pub fn new(q: f64, t0: f64, mode: TemperatureMode) -> Result<Self> {
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "T0 must be positive, got {t0}"
            )));
        }
        if !q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "q must be finite, got {q}"
            )));
        }
        if mode == TemperatureMode::Cooled && !(q > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cooled schedule needs q > 1, got {q}"
            )));
        }
        Ok(Self { q, t0, mode })
    }

    /// Temperature at epoch `k >= 1`.
    pub fn temperature(&self, k: u64) -> f64 {
        match self.mode {
            TemperatureMode::Fixed => self.t0,
            TemperatureMode::Cooled => {
                cooled_temperature(self.t0, self.q, k.max(1)).expect("validated in new")
            }
        }
    }

    /// `(T_k, Q(T_k, k))`.
    pub fn noise(&self, k: u64) -> (f64, f64) {
        let t = self.temperature(k);
        (t, noise_factor(t, k, self.q))
    }
}
