//! One Gibbs sweep over the three modes.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::distributions::sample_mvn_canonical;
use super::hyper::{sample_mode_hyperparams, Hyperprior};
use super::model::ModelState;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, matvec};
use crate::rng::{self, Purpose};
use crate::scalar::Real;
use crate::tensor::{FiberIndex, Mode, SparseTensor};

/// Canonical-form conditional of one latent row: precision `P` and
/// `h = P·m`.
#[derive(Debug, Clone)]
pub struct RowConditional<T> {
    pub precision: Array2<T>,
    pub h: Array1<T>,
}

impl<T: Real> RowConditional<T> {
    /// Posterior mean `m = P⁻¹·h`.
    pub fn mean(&self) -> Result<Array1<T>> {
        Ok(cholesky_with_jitter(&self.precision, "precision")?.solve(&self.h))
    }
}

/// `P = Λ + α·Σ q·qᵀ`, `h = Λ·μ + α·Σ y·q` over the observed cells of entity
/// `e`, where `q` is the elementwise product of the other two modes' rows.
pub fn row_conditional<T: Real>(
    state: &ModelState<T>,
    tensor: &SparseTensor<T>,
    fibers: &FiberIndex,
    e: usize,
) -> RowConditional<T> {
    let mode = fibers.mode();
    let params = state.params(mode);
    let prior_h = matvec(&params.lambda, &params.mu);
    accumulate(
        state,
        tensor,
        fibers.entity(e),
        mode,
        &params.lambda,
        prior_h,
    )
}

fn accumulate<T: Real>(
    state: &ModelState<T>,
    tensor: &SparseTensor<T>,
    members: &[usize],
    mode: Mode,
    lambda: &Array2<T>,
    mut h: Array1<T>,
) -> RowConditional<T> {
    let d = state.latent_dim();
    let alpha = state.alpha();
    let (ma, mb) = mode.others();
    let (la, lb) = (state.latents(ma), state.latents(mb));
    let mut p = lambda.clone();
    let mut q = vec![T::zero(); d];
    let entries = tensor.entries();
    for &pos in members {
        let entry = &entries[pos];
        let (ra, rb) = (la.row(entry.coord.along(ma)), lb.row(entry.coord.along(mb)));
        for (x, (&a, &b)) in q.iter_mut().zip(ra.iter().zip(rb.iter())) {
            *x = a * b;
        }
        let ay = alpha * entry.value;
        for r in 0..d {
            h[r] += ay * q[r];
            let aq = alpha * q[r];
            for c in 0..=r {
                p[[r, c]] += aq * q[c];
            }
        }
    }
    // only the lower triangle was accumulated
    for r in 0..d {
        for c in (r + 1)..d {
            p[[r, c]] = p[[c, r]];
        }
    }
    RowConditional { precision: p, h }
}

/// Fresh draw of every latent row of `mode`.
///
/// Row `e` uses the stream keyed by `(seed, sweep, mode, e)`, so the result
/// does not depend on how rows are distributed over threads.
pub fn sample_mode_latents<T: Real>(
    state: &ModelState<T>,
    tensor: &SparseTensor<T>,
    fibers: &FiberIndex,
    sweep: u64,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Array2<T>> {
    let mode = fibers.mode();
    let d = state.latent_dim();
    let n = state.latents(mode).nrows();
    if fibers.num_entities() != n {
        return Err(Error::invalid("fiber index does not match model dims"));
    }
    let params = state.params(mode);
    let prior_h = matvec(&params.lambda, &params.mu);
    let draw = |e: usize| -> Result<Vec<T>> {
        let cond = accumulate(
            state,
            tensor,
            fibers.entity(e),
            mode,
            &params.lambda,
            prior_h.clone(),
        );
        let chol = cholesky_with_jitter(&cond.precision, "precision")?;
        let mut rng = rng::stream(
            state.seed(),
            sweep,
            Purpose::Latents { mode: mode.axis() },
            e as u64,
        );
        Ok(sample_mvn_canonical(
            &chol,
            cond.h.as_slice().expect("contiguous"),
            &mut rng,
        ))
    };
    let rows: Vec<Vec<T>> = match pool {
        Some(pool) => pool.install(|| (0..n).into_par_iter().map(draw).collect::<Result<_>>())?,
        None => (0..n).map(draw).collect::<Result<_>>()?,
    };
    let mut out = Array2::<T>::zeros((n, d));
    for (e, row) in rows.into_iter().enumerate() {
        for (c, x) in row.into_iter().enumerate() {
            out[[e, c]] = x;
        }
    }
    Ok(out)
}

/// Observed tensor plus everything a sweep needs that does not change
/// between sweeps.
pub struct GibbsSampler<'a, T> {
    tensor: &'a SparseTensor<T>,
    fibers: [FiberIndex; 3],
    hyperprior: Hyperprior<T>,
    pool: Option<rayon::ThreadPool>,
}

impl<'a, T: Real> GibbsSampler<'a, T> {
    pub fn new(tensor: &'a SparseTensor<T>, hyperprior: Hyperprior<T>) -> Self {
        Self {
            tensor,
            fibers: Mode::ALL.map(|m| tensor.fibers(m)),
            hyperprior,
            pool: None,
        }
    }

    /// Sample latent rows on `threads` workers. One thread means a plain
    /// serial loop.
    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        self.pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(self)
    }

    pub fn tensor(&self) -> &SparseTensor<T> {
        self.tensor
    }

    pub fn hyperprior(&self) -> &Hyperprior<T> {
        &self.hyperprior
    }

    fn check_state(&self, state: &ModelState<T>) -> Result<()> {
        if state.dims() != self.tensor.dims() {
            return Err(Error::invalid(format!(
                "model dims {:?} do not match tensor dims {:?}",
                state.dims(),
                self.tensor.dims()
            )));
        }
        if state.latent_dim() != self.hyperprior.dim() {
            return Err(Error::invalid(
                "model and hyperprior latent dimensions differ",
            ));
        }
        Ok(())
    }

    /// One full sweep, modes in the order target, indication, layer: draw
    /// the mode's hyperparameters, then all of its rows.
    pub fn step(&self, state: &mut ModelState<T>) -> Result<()> {
        self.check_state(state)?;
        let sweep = state.sweeps + 1;
        for mode in Mode::ALL {
            let mut rng = rng::stream(state.seed(), sweep, Purpose::Hyper { mode: mode.axis() }, 0);
            let params =
                sample_mode_hyperparams(state.latents(mode).view(), &self.hyperprior, &mut rng)?;
            state.set_params(mode, params);
            let rows = sample_mode_latents(
                state,
                self.tensor,
                &self.fibers[mode.axis()],
                sweep,
                self.pool.as_ref(),
            )?;
            *state.latents_mut(mode) = rows;
        }
        if !state.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite latent value after sweep {sweep}"
            )));
        }
        state.sweeps = sweep;
        Ok(())
    }

    /// Root mean squared error of the clamped single-sample predictions on
    /// the observed cells.
    pub fn train_rmse(&self, state: &ModelState<T>) -> T {
        let n = self.tensor.len().max(1);
        let sse: T = self
            .tensor
            .entries()
            .iter()
            .map(|e| {
                let r = super::model::clamp_unit(state.raw_score(e.coord)) - e.value;
                r * r
            })
            .sum();
        (sse / T::from_usize_lossy(n)).sqrt()
    }
}

/// Convenience single sweep with the standard hyperprior.
pub fn gibbs_step<T: Real>(state: &mut ModelState<T>, tensor: &SparseTensor<T>) -> Result<()> {
    let prior = Hyperprior::standard(state.latent_dim())?;
    GibbsSampler::new(tensor, prior).step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::hyper::ModeParams;
    use crate::sampler::model::init_model;
    use crate::tensor::Coord;
    use ndarray::array;

    fn fixed_state(u: Array2<f64>, v: Array2<f64>, w: Array2<f64>, alpha: f64) -> ModelState<f64> {
        let d = u.ncols();
        let p = ModeParams {
            mu: Array1::zeros(d),
            lambda: Array2::eye(d),
        };
        ModelState::from_parts([u, v, w], [p.clone(), p.clone(), p], alpha, 3, 0).unwrap()
    }

    #[test]
    fn two_observation_conditional_matches_dense_oracle() {
        // target 0 observed at (0,0,0)=0.8 and (0,1,1)=0.2
        let v = array![[1.0, 2.0], [0.5, -1.0]];
        let w = array![[0.3, 0.4], [2.0, 1.0]];
        let mut state = fixed_state(array![[0.0, 0.0]], v, w, 5.0);
        state.set_params(
            Mode::Target,
            ModeParams {
                mu: array![0.1, -0.2],
                lambda: array![[2.0, 0.5], [0.5, 1.0]],
            },
        );
        let t = SparseTensor::from_entries(
            [1, 2, 2],
            [(Coord::new(0, 0, 0), 0.8), (Coord::new(0, 1, 1), 0.2)],
        )
        .unwrap();
        let cond = row_conditional(&state, &t, &t.fibers(Mode::Target), 0);

        // q1 = v0∘w0 = [0.3, 0.8], q2 = v1∘w1 = [1.0, -1.0]
        // P = Λ + 5(q1q1ᵀ + q2q2ᵀ)
        let p = array![
            [2.0 + 5.0 * (0.09 + 1.0), 0.5 + 5.0 * (0.24 - 1.0)],
            [0.5 + 5.0 * (0.24 - 1.0), 1.0 + 5.0 * (0.64 + 1.0)]
        ];
        // h = Λμ + 5(0.8 q1 + 0.2 q2), Λμ = [0.1, 0.05 - 0.2]
        let h = array![0.1 + 5.0 * (0.24 + 0.2), -0.15 + 5.0 * (0.64 - 0.2)];
        for (a, b) in cond.precision.iter().zip(p.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        for (a, b) in cond.h.iter().zip(h.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        // m = P⁻¹ h by Cramer's rule
        let det = p[[0, 0]] * p[[1, 1]] - p[[0, 1]] * p[[1, 0]];
        let m0 = (p[[1, 1]] * h[0] - p[[0, 1]] * h[1]) / det;
        let m1 = (p[[0, 0]] * h[1] - p[[1, 0]] * h[0]) / det;
        let m = cond.mean().unwrap();
        assert!((m[0] - m0).abs() < 1e-12 && (m[1] - m1).abs() < 1e-12);
    }

    #[test]
    fn huge_alpha_pins_row_to_closed_form() {
        // D=1, y = 0.6, q = v·w = 0.8·1.5 = 1.2 → u ≈ 0.5
        let state = fixed_state(array![[0.0]], array![[0.8]], array![[1.5]], 1e8);
        let t = SparseTensor::from_entries([1, 1, 1], [(Coord::new(0, 0, 0), 0.6)]).unwrap();
        let rows = sample_mode_latents(&state, &t, &t.fibers(Mode::Target), 1, None).unwrap();
        assert!((rows[[0, 0]] - 0.5).abs() < 1e-3, "{}", rows[[0, 0]]);
    }

    #[test]
    fn unobserved_entity_draws_from_mode_prior() {
        let mut state = fixed_state(
            array![[0.0, 0.0], [0.0, 0.0]],
            array![[1.0, 1.0]],
            array![[1.0, 1.0]],
            5.0,
        );
        let mu = array![0.7, -0.3];
        state.set_params(
            Mode::Target,
            ModeParams {
                mu: mu.clone(),
                lambda: array![[4.0, 1.0], [1.0, 2.0]],
            },
        );
        // entity 1 has no observations
        let t = SparseTensor::from_entries([2, 1, 1], [(Coord::new(0, 0, 0), 1.0)]).unwrap();
        let fibers = t.fibers(Mode::Target);
        let reps = 10_000;
        let mut sum = [0.0; 2];
        for sweep in 1..=reps {
            let rows = sample_mode_latents(&state, &t, &fibers, sweep, None).unwrap();
            sum[0] += rows[[1, 0]];
            sum[1] += rows[[1, 1]];
        }
        // marginal variances from Λ⁻¹ = [[2,-1],[-1,4]]/7
        let se = [
            (2.0f64 / 7.0 / reps as f64).sqrt(),
            (4.0f64 / 7.0 / reps as f64).sqrt(),
        ];
        for c in 0..2 {
            let mean = sum[c] / reps as f64;
            assert!((mean - mu[c]).abs() < 4.0 * se[c], "col {c}: {mean}");
        }
    }

    #[test]
    fn step_changes_state_and_is_reproducible() {
        let t = SparseTensor::from_entries(
            [3, 2, 2],
            [
                (Coord::new(0, 0, 0), 1.0),
                (Coord::new(2, 1, 1), 0.0),
                (Coord::new(1, 1, 0), 0.5),
            ],
        )
        .unwrap();
        let prior = Hyperprior::<f64>::standard(4).unwrap();
        let start = init_model([3, 2, 2], 4, &prior, 5.0, 21).unwrap();
        let mut a = start.clone();
        gibbs_step(&mut a, &t).unwrap();
        assert_ne!(a, start);
        assert_eq!(a.sweeps(), 1);
        let mut b = start.clone();
        gibbs_step(&mut b, &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn threaded_sweep_matches_serial() {
        let cells = (0..6).flat_map(|i| {
            (0..5).map(move |j| (Coord::new(i, j, (i + j) % 3), ((i * j) % 4) as f64 / 4.0))
        });
        let t = SparseTensor::from_entries([6, 5, 3], cells).unwrap();
        let prior = Hyperprior::<f64>::standard(3).unwrap();
        let mut serial = init_model([6, 5, 3], 3, &prior, 5.0, 8).unwrap();
        let mut threaded = serial.clone();
        let s1 = GibbsSampler::new(&t, prior.clone());
        let s4 = GibbsSampler::new(&t, prior).with_threads(4).unwrap();
        for _ in 0..5 {
            s1.step(&mut serial).unwrap();
            s4.step(&mut threaded).unwrap();
        }
        assert_eq!(serial, threaded);
    }

    #[test]
    fn dims_mismatch_is_rejected() {
        let t = SparseTensor::from_entries([2, 2, 2], [(Coord::new(0, 0, 0), 1.0)]).unwrap();
        let prior = Hyperprior::<f64>::standard(2).unwrap();
        let mut s = init_model([3, 2, 2], 2, &prior, 5.0, 0).unwrap();
        assert!(GibbsSampler::new(&t, prior).step(&mut s).is_err());
    }
}
