use ndarray::{Array2, ArrayView1};

use super::hyper::{Hyperprior, ModeParams};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::scalar::Real;
use crate::tensor::{Coord, Mode};

/// Latent factors, per-mode hyperparameters and observation precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T> {
    pub(crate) latents: [Array2<T>; 3],
    pub(crate) params: [ModeParams<T>; 3],
    alpha: T,
    seed: u64,
    /// Sweeps completed so far; keys the random streams of the next sweep.
    pub(crate) sweeps: u64,
}

/// Fresh model: latents i.i.d. `Normal(0, 1)`, `μ = μ0`, `Λ = I`.
pub fn init_model<T: Real>(
    dims: [usize; 3],
    latent_dim: usize,
    hyperprior: &Hyperprior<T>,
    alpha: T,
    seed: u64,
) -> Result<ModelState<T>> {
    if latent_dim == 0 {
        return Err(Error::invalid("latent dimension must be at least 1"));
    }
    if hyperprior.dim() != latent_dim {
        return Err(Error::invalid(format!(
            "hyperprior dimension {} does not match latent dimension {latent_dim}",
            hyperprior.dim()
        )));
    }
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::invalid(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if dims.contains(&0) {
        return Err(Error::invalid(format!(
            "dims must be positive, got {dims:?}"
        )));
    }
    let latents = Mode::ALL.map(|mode| {
        let mut rng = rng::stream(seed, 0, Purpose::Init { mode: mode.axis() }, 0);
        let n = dims[mode.axis()];
        let data: Vec<T> = (0..n * latent_dim)
            .map(|_| T::std_normal(&mut rng))
            .collect();
        Array2::from_shape_vec((n, latent_dim), data).expect("shape matches buffer")
    });
    let params = Mode::ALL.map(|_| ModeParams {
        mu: hyperprior.mu0().clone(),
        lambda: Array2::eye(latent_dim),
    });
    Ok(ModelState {
        latents,
        params,
        alpha,
        seed,
        sweeps: 0,
    })
}

impl<T: Real> ModelState<T> {
    /// Assemble a state from parts, e.g. when restoring a checkpoint.
    pub fn from_parts(
        latents: [Array2<T>; 3],
        params: [ModeParams<T>; 3],
        alpha: T,
        seed: u64,
        sweeps: u64,
    ) -> Result<Self> {
        let d = latents[0].ncols();
        if d == 0 || latents.iter().any(|l| l.ncols() != d || l.nrows() == 0) {
            return Err(Error::invalid(
                "latent matrices must share a positive width",
            ));
        }
        if params
            .iter()
            .any(|p| p.mu.len() != d || p.lambda.dim() != (d, d))
        {
            return Err(Error::invalid("mode parameters do not match latent width"));
        }
        if !(alpha > T::zero()) {
            return Err(Error::invalid("alpha must be positive"));
        }
        let state = Self {
            latents,
            params,
            alpha,
            seed,
            sweeps,
        };
        if !state.is_finite() {
            return Err(Error::Data("non-finite latent value".into()));
        }
        Ok(state)
    }

    pub fn latent_dim(&self) -> usize {
        self.latents[0].ncols()
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.latents[0].nrows(),
            self.latents[1].nrows(),
            self.latents[2].nrows(),
        ]
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn latents(&self, mode: Mode) -> &Array2<T> {
        &self.latents[mode.axis()]
    }

    pub fn latents_mut(&mut self, mode: Mode) -> &mut Array2<T> {
        &mut self.latents[mode.axis()]
    }

    pub fn params(&self, mode: Mode) -> &ModeParams<T> {
        &self.params[mode.axis()]
    }

    pub fn set_params(&mut self, mode: Mode, params: ModeParams<T>) {
        self.params[mode.axis()] = params;
    }

    pub fn row(&self, mode: Mode, e: usize) -> ArrayView1<'_, T> {
        self.latents[mode.axis()].row(e)
    }

    pub fn is_finite(&self) -> bool {
        self.latents.iter().all(|l| l.iter().all(|x| x.is_finite()))
    }

    /// Unclamped `Σ_d U[i,d]·V[j,d]·W[k,d]`.
    pub fn raw_score(&self, c: Coord) -> T {
        let (u, v, w) = (
            self.latents[0].row(c.i),
            self.latents[1].row(c.j),
            self.latents[2].row(c.k),
        );
        let mut s = T::zero();
        for d in 0..u.len() {
            s += u[d] * v[d] * w[d];
        }
        s
    }

    /// Single-sample prediction, clamped into `[0, 1]`.
    pub fn predict_cell(&self, i: usize, j: usize, k: usize) -> Result<T> {
        let c = Coord::new(i, j, k);
        let dims = self.dims();
        if !c.within(dims) {
            return Err(Error::OutOfRange { i, j, k, dims });
        }
        Ok(clamp_unit(self.raw_score(c)))
    }
}

pub(crate) fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}
