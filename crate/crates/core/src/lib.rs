//! Feedforward network training with Rprop, the Hybrid Learning Scheme (HLS)
//! and ESLA, an annealed variant of HLS.
//!
//! HLS and ESLA are Rprop-style sign-based learners that descend a
//! *perturbed* energy: the batch error plus a weight-decay term whose
//! strength follows a Tsallis q-exponential schedule `Q(T, k)`. ESLA also
//! cools the temperature `T` as a power law of the epoch count, so it is
//! stochastic early and nearly deterministic late.
//!
//! - [`netcore`]: networks, batch energy, backpropagation, classification
//! - [`tsallis`]: q-exponential, entropy, noise schedule, cooling law
//! - [`optim`]: the three learners as epoch-level state machines
//! - [`data`]: PROBEN1 files, splits, stratified folds, boolean problems
//! - [`eval`]: multi-trial benchmarks, Wilcoxon tests, q-sweeps, landscapes
//!
//! ```
//! use esla::data::{gen_boolean, BooleanEncoding, BooleanProblem};
//! use esla::netcore::{Activation, Network, Topology};
//! use esla::optim::{train, Algorithm, OptimizerConfig};
//!
//! let data = gen_boolean(BooleanProblem::Xor, BooleanEncoding::Bipolar);
//! let topology = Topology::uniform(vec![2, 2, 1], Activation::Tansig)?;
//! let net = Network::init_weights(topology, 3, 0.5)?;
//! let cfg = OptimizerConfig {
//!     algorithm: Algorithm::Esla,
//!     q: 2.1,
//!     error_target: 1e-5,
//!     ..OptimizerConfig::default()
//! };
//! let (trained, report) = train(&net, &data, &cfg, 3)?;
//! assert_eq!(report.energy_trace.len(), report.epochs_run as usize);
//! assert!(report.final_energy.is_finite());
//! assert!((0.0..=100.0).contains(&trained.classify(&data)?));
//! # Ok::<(), esla::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
mod error;
pub mod eval;
pub mod netcore;
pub mod optim;
pub mod tsallis;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/schedules.md")]
    mod schedules {}
    #[doc = include_str!("../../../book/src/learners.md")]
    mod learners {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
