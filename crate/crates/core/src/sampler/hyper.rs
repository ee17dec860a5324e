//! Gaussian-Wishart hyperprior over the latent rows of one mode.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

use super::distributions::{sample_mvn, sample_wishart, scaled};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, is_spd, symmetrize, Cholesky};
use crate::scalar::Real;

/// Prior `Λ ~ Wishart(W0, ν0)`, `μ | Λ ~ Normal(μ0, (β0·Λ)⁻¹)`.
#[derive(Debug, Clone)]
pub struct Hyperprior<T> {
    mu0: Array1<T>,
    beta0: T,
    w0: Array2<T>,
    nu0: T,
    w0_inv: Array2<T>,
}

impl<T: Real> Hyperprior<T> {
    pub fn new(mu0: Array1<T>, beta0: T, w0: Array2<T>, nu0: T) -> Result<Self> {
        let d = mu0.len();
        if d == 0 {
            return Err(Error::invalid("latent dimension must be at least 1"));
        }
        if w0.nrows() != d || w0.ncols() != d {
            return Err(Error::invalid("W0 shape does not match mu0"));
        }
        if !(beta0 > T::zero()) {
            return Err(Error::invalid(format!(
                "beta0 must be positive, got {beta0}"
            )));
        }
        if !(nu0 >= T::from_usize_lossy(d)) {
            return Err(Error::invalid(format!(
                "nu0 must be at least {d}, got {nu0}"
            )));
        }
        if (0..d).any(|i| (0..i).any(|j| w0[[i, j]] != w0[[j, i]])) {
            return Err(Error::NotSpd("scale matrix"));
        }
        let w0_inv = Cholesky::new(&w0)
            .ok_or(Error::NotSpd("scale matrix"))?
            .inverse();
        Ok(Self {
            mu0,
            beta0,
            w0,
            nu0,
            w0_inv,
        })
    }

    /// `μ0 = 0`, `β0 = 2`, `W0 = I`, `ν0 = D`.
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(
            Array1::zeros(d),
            T::lit(2.0),
            Array2::eye(d),
            T::from_usize_lossy(d),
        )
    }

    pub fn dim(&self) -> usize {
        self.mu0.len()
    }

    pub fn mu0(&self) -> &Array1<T> {
        &self.mu0
    }

    pub fn beta0(&self) -> T {
        self.beta0
    }

    pub fn w0(&self) -> &Array2<T> {
        &self.w0
    }

    pub fn nu0(&self) -> T {
        self.nu0
    }
}

/// Mean and precision of one mode's latent prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeParams<T> {
    pub mu: Array1<T>,
    pub lambda: Array2<T>,
}

impl<T: Real> ModeParams<T> {
    pub fn is_valid(&self) -> bool {
        self.mu.iter().all(|x| x.is_finite()) && is_spd(&self.lambda)
    }
}

/// Conditional posterior constants of the Gaussian-Wishart given `n` rows.
#[derive(Debug, Clone)]
pub struct GaussianWishartPosterior<T> {
    pub mu: Array1<T>,
    pub beta: T,
    pub nu: T,
    pub scale: Array2<T>,
}

/// `β* = β0+n`, `ν* = ν0+n`, `μ* = (β0·μ0 + n·x̄)/β*`,
/// `W*⁻¹ = W0⁻¹ + n·S + (β0·n/β*)(x̄−μ0)(x̄−μ0)ᵀ` with `S` the 1/n scatter.
pub fn gaussian_wishart_posterior<T: Real>(
    latents: ArrayView2<'_, T>,
    prior: &Hyperprior<T>,
) -> Result<GaussianWishartPosterior<T>> {
    let (n, d) = latents.dim();
    if n == 0 {
        return Err(Error::invalid(
            "hyperparameter update needs at least one latent row",
        ));
    }
    if d != prior.dim() {
        return Err(Error::invalid(
            "latent width does not match hyperprior dimension",
        ));
    }
    let nf = T::from_usize_lossy(n);
    let mut mean = Array1::<T>::zeros(d);
    for row in latents.rows() {
        for (m, &x) in mean.iter_mut().zip(row.iter()) {
            *m += x;
        }
    }
    mean.mapv_inplace(|m| m / nf);

    // n·S accumulated from centered rows.
    let mut inv_scale = prior.w0_inv.clone();
    let mut centered = vec![T::zero(); d];
    for row in latents.rows() {
        for (c, (&x, &m)) in centered.iter_mut().zip(row.iter().zip(mean.iter())) {
            *c = x - m;
        }
        for r in 0..d {
            for c in 0..=r {
                inv_scale[[r, c]] += centered[r] * centered[c];
            }
        }
    }
    let beta = prior.beta0 + nf;
    let shrink = prior.beta0 * nf / beta;
    let diff: Vec<T> = mean
        .iter()
        .zip(prior.mu0.iter())
        .map(|(&a, &b)| a - b)
        .collect();
    for r in 0..d {
        for c in 0..=r {
            inv_scale[[r, c]] += shrink * diff[r] * diff[c];
        }
    }
    for r in 0..d {
        for c in 0..r {
            inv_scale[[c, r]] = inv_scale[[r, c]];
        }
    }
    let mu = Array1::from_iter(
        prior
            .mu0
            .iter()
            .zip(mean.iter())
            .map(|(&m0, &xb)| (prior.beta0 * m0 + nf * xb) / beta),
    );
    let mut scale = cholesky_with_jitter(&inv_scale, "posterior scale")?.inverse();
    symmetrize(&mut scale);
    Ok(GaussianWishartPosterior {
        mu,
        beta,
        nu: prior.nu0 + nf,
        scale,
    })
}

/// Draw `(μ, Λ)` for one mode given its current latent rows.
pub fn sample_mode_hyperparams<T: Real, R: Rng + ?Sized>(
    latents: ArrayView2<'_, T>,
    prior: &Hyperprior<T>,
    rng: &mut R,
) -> Result<ModeParams<T>> {
    let post = gaussian_wishart_posterior(latents, prior)?;
    let lambda = sample_wishart(&post.scale, post.nu, rng)?;
    let mu = sample_mvn(&post.mu, &scaled(&lambda, post.beta), rng)?;
    Ok(ModeParams { mu, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validates_prior() {
        assert!(Hyperprior::<f64>::standard(0).is_err());
        assert!(Hyperprior::new(array![0.0, 0.0], 0.0, Array2::eye(2), 2.0).is_err());
        assert!(Hyperprior::new(array![0.0, 0.0], 1.0, Array2::eye(2), 1.5).is_err());
        assert!(
            Hyperprior::new(array![0.0, 0.0], 1.0, array![[1.0, 0.5], [0.4, 1.0]], 2.0).is_err()
        );
        assert!(
            Hyperprior::new(array![0.0, 0.0], 1.0, array![[1.0, 2.0], [2.0, 1.0]], 2.0).is_err()
        );
        let p = Hyperprior::<f64>::standard(4).unwrap();
        assert_eq!(p.beta0(), 2.0);
        assert_eq!(p.nu0(), 4.0);
    }

    #[test]
    fn empty_mode_is_rejected() {
        let prior = Hyperprior::<f64>::standard(2).unwrap();
        let empty = Array2::<f64>::zeros((0, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_mode_hyperparams(empty.view(), &prior, &mut rng).is_err());
    }

    #[test]
    fn rows_at_prior_mean_keep_prior_mean() {
        let mu0 = array![0.25, -1.5, 3.0];
        let prior = Hyperprior::new(mu0.clone(), 1e9, Array2::eye(3), 3.0).unwrap();
        let rows = Array2::from_shape_fn((5, 3), |(_, c)| mu0[c]);
        let post = gaussian_wishart_posterior(rows.view(), &prior).unwrap();
        assert_eq!(post.mu, mu0);
        assert_eq!(post.beta, 1e9 + 5.0);
        assert_eq!(post.nu, 8.0);
    }

    #[test]
    fn posterior_scale_matches_dense_formula() {
        // Hand expansion for D=1: W*⁻¹ = 1/w0 + Σ(x-x̄)² + β0 n/(β0+n) (x̄-μ0)².
        let prior = Hyperprior::new(array![1.0], 2.0, array![[0.5]], 1.0).unwrap();
        let rows = array![[1.0], [2.0], [6.0]];
        let post = gaussian_wishart_posterior(rows.view(), &prior).unwrap();
        let xbar = 3.0;
        let inv = 2.0 + (4.0 + 1.0 + 9.0) + 2.0 * 3.0 / 5.0 * (xbar - 1.0f64).powi(2);
        assert!((post.scale[[0, 0]] - 1.0 / inv).abs() < 1e-14);
        assert!((post.mu[0] - (2.0 * 1.0 + 3.0 * xbar) / 5.0).abs() < 1e-14);
    }

    #[test]
    fn single_identical_rows_still_sample() {
        // zero scatter: W0⁻¹ keeps the posterior scale SPD
        let prior = Hyperprior::<f64>::standard(3).unwrap();
        let rows = Array2::from_elem((1, 3), 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = sample_mode_hyperparams(rows.view(), &prior, &mut rng).unwrap();
        assert!(p.is_valid());
    }
}
