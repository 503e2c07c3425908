//! Attractor reconstruction from partial time-series measurements.
//!
//! The pipeline: lag-lift a univariate signal into a Hankel matrix
//! ([`timeseries`]), train an autoencoder whose latent layer carries a
//! false-nearest-neighbor activity regularizer ([`fnn`], [`autoencoder`]),
//! and compare the learned embedding against a ground-truth attractor with
//! a suite of similarity metrics ([`metrics`]). Benchmark chaotic systems
//! live in [`dynsys`]; classical linear embeddings and the Kennel
//! false-neighbor dimension heuristic in [`baselines`].

pub mod autoencoder;
pub mod baselines;
pub mod dynsys;
pub mod error;
pub mod fnn;
pub mod metrics;
pub mod timeseries;

pub use error::{Error, Result};
