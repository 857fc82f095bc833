//! Two-parameter landscapes for visualizing optimizer trajectories.

use crate::error::{Error, Result};
use crate::optim::{minimize, Algorithm, Objective, OptimizerConfig};

/// A Gaussian well `depth * exp(-|w - center|^2 / width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub center: [f64; 2],
    pub depth: f64,
    pub width: f64,
}

/// `f(w) = 1 - sum_i depth_i * exp(-|w - center_i|^2 / width_i)`.
///
/// The default instance has its global minimum near `(2, 2)` and two local
/// minima near `(-2, 1)` and `(0, -2)`, separated by nearly flat ridges.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeBasin {
    pub wells: [Well; 3],
}

impl Default for ThreeBasin {
    fn default() -> Self {
        Self {
            wells: [
                Well {
                    center: [2.0, 2.0],
                    depth: 1.0,
                    width: 0.5,
                },
                Well {
                    center: [-2.0, 1.0],
                    depth: 0.7,
                    width: 0.5,
                },
                Well {
                    center: [0.0, -2.0],
                    depth: 0.6,
                    width: 0.3,
                },
            ],
        }
    }
}

impl ThreeBasin {
    pub fn value(&self, w: [f64; 2]) -> f64 {
        1.0 - self
            .wells
            .iter()
            .map(|g| {
                let d2 = (w[0] - g.center[0]).powi(2) + (w[1] - g.center[1]).powi(2);
                g.depth * (-d2 / g.width).exp()
            })
            .sum::<f64>()
    }

    pub fn gradient(&self, w: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for well in &self.wells {
            let dx = w[0] - well.center[0];
            let dy = w[1] - well.center[1];
            let e = well.depth * (-(dx * dx + dy * dy) / well.width).exp();
            g[0] += 2.0 * dx / well.width * e;
            g[1] += 2.0 * dy / well.width * e;
        }
        g
    }
}

fn pair(params: &[f64]) -> Result<[f64; 2]> {
    match params {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Dimension {
            what: "landscape parameters",
            expected: 2,
            actual: params.len(),
        }),
    }
}

impl Objective for ThreeBasin {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&mut self, params: &[f64]) -> Result<f64> {
        Ok(self.value(pair(params)?))
    }

    fn energy_and_gradient(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        let w = pair(params)?;
        grad.copy_from_slice(&ThreeBasin::gradient(self, w));
        Ok(self.value(w))
    }
}

const DIFF_STEP: f64 = 1.0 / 1_048_576.0;

/// A user-supplied 2-D function; the gradient falls back to central
/// differences when no analytic one is given.
///
/// The difference step is `2^-20`, so `w +- h` is exact for coordinates on a
/// dyadic lattice and a symmetric minimum gets an exactly zero gradient.
pub struct FnObjective<F, G = fn([f64; 2]) -> [f64; 2]> {
    f: F,
    grad: Option<G>,
    step: f64,
}

impl<F: Fn([f64; 2]) -> f64> FnObjective<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            grad: None,
            step: DIFF_STEP,
        }
    }
}

impl<F: Fn([f64; 2]) -> f64, G: Fn([f64; 2]) -> [f64; 2]> FnObjective<F, G> {
    pub fn with_gradient(f: F, grad: G) -> Self {
        Self {
            f,
            grad: Some(grad),
            step: DIFF_STEP,
        }
    }
}

impl<F: Fn([f64; 2]) -> f64, G: Fn([f64; 2]) -> [f64; 2]> Objective for FnObjective<F, G> {
    fn dim(&self) -> usize {
        2
    }

    fn energy(&mut self, params: &[f64]) -> Result<f64> {
        Ok((self.f)(pair(params)?))
    }

    fn energy_and_gradient(&mut self, params: &[f64], grad: &mut [f64]) -> Result<f64> {
        let w = pair(params)?;
        let g = match &self.grad {
            Some(g) => g(w),
            None => {
                let h = self.step;
                let d = |i: usize| {
                    let mut up = w;
                    let mut down = w;
                    up[i] += h;
                    down[i] -= h;
                    ((self.f)(up) - (self.f)(down)) / (2.0 * h)
                };
                [d(0), d(1)]
            }
        };
        grad.copy_from_slice(&g);
        Ok((self.f)(w))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub algorithm: Algorithm,
    /// Start point followed by the point after every epoch.
    pub points: Vec<[f64; 2]>,
    /// Objective value at each point.
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn end(&self) -> [f64; 2] {
        *self.points.last().unwrap()
    }
}

/// Start point for the default landscape demo: on the local-basin side of
/// the ridge separating the `(-2, 1)` basin from the global one.
pub const THREE_BASIN_START: [f64; 2] = [-0.4, 2.5];

/// Seeds used for the default landscape demo.
pub const THREE_BASIN_SEEDS: std::ops::Range<u64> = 0..20;

/// Optimizer settings used for landscape traces: stepsizes suited to a
/// domain of a few units and no error target, so every run lasts
/// `max_epochs` epochs.
pub fn landscape_config(algorithm: Algorithm) -> OptimizerConfig {
    OptimizerConfig {
        algorithm,
        delta0: 0.05,
        delta_max: 1.0,
        q: 2.1,
        max_epochs: 300,
        error_target: f64::NEG_INFINITY,
        ..OptimizerConfig::default()
    }
}

/// Runs every configuration from `start` on `objective` and records the
/// visited points.
pub fn landscape_trace<O: Objective>(
    objective: &mut O,
    start: [f64; 2],
    configs: &[OptimizerConfig],
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if objective.dim() != 2 {
        return Err(Error::Dimension {
            what: "landscape objective",
            expected: 2,
            actual: objective.dim(),
        });
    }
    configs
        .iter()
        .map(|cfg| {
            let cfg = OptimizerConfig {
                record_weights: true,
                ..cfg.clone()
            };
            let mut params = start.to_vec();
            let report = minimize(objective, &mut params, &cfg, seed)?;
            if let Some(why) = report.abort {
                return Err(Error::NonFinite(why));
            }
            let points = report
                .weight_trace
                .unwrap_or_default()
                .into_iter()
                .map(|w| [w[0], w[1]])
                .collect::<Vec<_>>();
            let values = points
                .iter()
                .map(|p| objective.energy(p))
                .collect::<Result<Vec<_>>>()?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("landscape value along trajectory".into()));
            }
            Ok(Trajectory {
                algorithm: cfg.algorithm,
                points,
                values,
            })
        })
        .collect()
}

/// Basins of attraction of a 2-D function on a square lattice, found by
/// discrete steepest descent over the 8-neighbourhood.
#[derive(Debug, Clone)]
pub struct BasinMap {
    lo: f64,
    hi: f64,
    n: usize,
    /// Basin index per lattice point, `None` on flat regions.
    labels: Vec<Option<usize>>,
    /// Minima sorted by value, lowest (global) first.
    minima: Vec<([f64; 2], f64)>,
}

impl BasinMap {
    /// Samples `f` on an `n x n` lattice spanning `[lo, hi]^2`. Lattice
    /// minima whose value lies within `flat_tol` of the largest sampled
    /// value are treated as plateau, not as basins.
    pub fn new(f: impl Fn([f64; 2]) -> f64, lo: f64, hi: f64, n: usize, flat_tol: f64) -> Self {
        assert!(n >= 2 && hi > lo);
        let coord = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let values: Vec<f64> = (0..n * n)
            .map(|idx| f([coord(idx / n), coord(idx % n)]))
            .collect();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        // steepest lower neighbour of every lattice point (itself at a minimum)
        let next: Vec<usize> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let mut best = idx;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (ni, nj) = (i as i64 + di, j as i64 + dj);
                        if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                            continue;
                        }
                        let nidx = ni as usize * n + nj as usize;
                        if values[nidx] < values[best] {
                            best = nidx;
                        }
                    }
                }
                best
            })
            .collect();

        let mut minima_idx: Vec<usize> = (0..n * n)
            .filter(|&idx| next[idx] == idx && values[idx] < top - flat_tol)
            .collect();
        minima_idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut labels = vec![None; n * n];
        for idx in 0..n * n {
            let mut cur = idx;
            while next[cur] != cur {
                cur = next[cur];
            }
            labels[idx] = minima_idx.iter().position(|&m| m == cur);
        }
        let minima = minima_idx
            .iter()
            .map(|&m| ([coord(m / n), coord(m % n)], values[m]))
            .collect();
        Self {
            lo,
            hi,
            n,
            labels,
            minima,
        }
    }

    /// The default certification lattice for [`ThreeBasin`]: 1000 x 1000
    /// points over `[-4, 4]^2`.
    pub fn three_basin(f: &ThreeBasin) -> Self {
        Self::new(|w| f.value(w), -4.0, 4.0, 1000, 1e-9)
    }

    pub fn minima(&self) -> &[([f64; 2], f64)] {
        &self.minima
    }

    /// Basin of the lattice point nearest to `w`; `0` is the global basin.
    /// Points outside the lattice or on a plateau have no basin.
    pub fn basin_of(&self, w: [f64; 2]) -> Option<usize> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        let index = |x: f64| {
            let k = ((x - self.lo) / step).round();
            (k >= 0.0 && k < self.n as f64).then_some(k as usize)
        };
        let (i, j) = (index(w[0])?, index(w[1])?);
        self.labels[i * self.n + j]
    }
}
