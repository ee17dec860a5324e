//! Bayesian CP factorization of the observation tensor by Gibbs sampling.
//!
//! Each mode has latent rows `x ~ Normal(μ, Λ⁻¹)` with a Gaussian-Wishart
//! hyperprior on `(μ, Λ)`; an observed cell `y_ijk` is
//! `Normal(Σ_d U[i,d]·V[j,d]·W[k,d], 1/α)`. A sweep alternates
//! hyperparameter and latent draws for each mode, and predictions are the
//! average over thinned post-burn-in states.

pub mod checkpoint;
mod distributions;
mod gibbs;
mod hyper;
mod model;
mod run;

pub use distributions::{sample_mvn, sample_wishart};
pub use gibbs::{gibbs_step, row_conditional, sample_mode_latents, GibbsSampler, RowConditional};
pub use hyper::{
    gaussian_wishart_posterior, sample_mode_hyperparams, GaussianWishartPosterior, Hyperprior,
    ModeParams,
};
pub use model::{init_model, ModelState};
pub use run::{PredictionAccumulator, RunOutput, SamplerSchedule};

/// Observation precision used when none is given.
pub const DEFAULT_ALPHA: f64 = 5.0;

/// Latent dimension used when none is given.
pub const DEFAULT_LATENT_DIM: usize = 32;
