//! Estimation of mmWave massive MIMO channel matrices from a small set of
//! noisy sampled entries, by jointly exploiting the channel's low rank and
//! its beamspace sparsity.
//!
//! The core solver ([`admm::solve`]) completes the matrix from masked
//! observations produced by an antenna-switching training protocol
//! ([`sampling`]), against ground-truth channels from a geometric multipath
//! model ([`channel`]). Plain SVT completion and beamspace OMP are provided
//! as baselines ([`baselines`]), with NMSE/ASE evaluation ([`metrics`]) and
//! a seeded Monte Carlo sweep harness ([`harness`]) behind the `mimo-mc`
//! CLI.

pub mod admm;
pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub(crate) mod jacobi_svd;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
