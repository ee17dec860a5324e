//! Bayesian tensor factorization of drug target × indication × evidence
//! observations, with the evidence ingestion and evaluation around it.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x > 0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fsutil;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod simulate;
pub mod tensor;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Real;

pub type Tensor = tensor::SparseTensor<f64>;
pub type Model = sampler::ModelState<f64>;
pub type Sampler<'a> = sampler::GibbsSampler<'a, f64>;
pub type Prior = sampler::Hyperprior<f64>;
pub type Synth = simulate::SynthData<f64>;
