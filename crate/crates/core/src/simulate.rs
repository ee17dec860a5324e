//! Synthetic low-rank tensors with known ground truth.
//!
//! Each mode gets rank-R latents with entries `Normal(0, 1/√R)` (variance),
//! so a cell's noiseless product has unit-order spread regardless of R.
//! Evidence layer `k ≥ 1` uses the row `c·w₀ + (1 − c)·z_k`, where `w₀`
//! is the outcome layer's row and `z_k` an independent draw; targets and
//! indications are shared across layers.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Real;
use crate::tensor::io::{dense_offset, numbered_index, save_tensor, write_dense_tsv};
use crate::tensor::{Coord, SparseTensor, TensorIndex};

pub const TRUTH_FILE: &str = "truth.tsv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub dims: [usize; 3],
    pub rank: usize,
    pub noise_sd: f64,
    pub observed_fraction: f64,
    pub seed: u64,
    /// 0 = evidence layers independent of the outcome layer, 1 = identical.
    pub coupling: f64,
    /// When set, observed outcome-layer values become 1 at or above this
    /// value and 0 below it.
    #[serde(default)]
    pub outcome_threshold: Option<f64>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::invalid(format!(
                "dims must be positive, got {:?}",
                self.dims
            )));
        }
        if self.rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::invalid(format!(
                "noise sd must be ≥ 0, got {}",
                self.noise_sd
            )));
        }
        if !(self.observed_fraction > 0.0 && self.observed_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "observed fraction must be in (0, 1], got {}",
                self.observed_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.coupling) {
            return Err(Error::invalid(format!(
                "coupling must be in [0, 1], got {}",
                self.coupling
            )));
        }
        if let Some(t) = self.outcome_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!(
                    "outcome threshold must be in [0, 1], got {t}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthData<T> {
    pub tensor: SparseTensor<T>,
    /// Clamped noiseless product of every cell, row-major over dims.
    pub truth: Vec<T>,
    /// Target, indication and layer factors, each `n × R`.
    pub latents: [Array2<T>; 3],
}

impl<T: Real> SynthData<T> {
    pub fn truth_at(&self, c: Coord) -> T {
        self.truth[dense_offset(self.tensor.dims(), c)]
    }
}

// stream ids within the Simulate purpose
const TARGETS: u64 = 0;
const INDICATIONS: u64 = 1;
const LAYERS: u64 = 2;
const CELLS: u64 = 3;

fn normal_matrix<T: Real, R: Rng>(rows: usize, cols: usize, sd: T, rng: &mut R) -> Array2<T> {
    let mut m = Array2::zeros((rows, cols));
    m.iter_mut().for_each(|x| *x = T::std_normal(rng) * sd);
    m
}

/// Raw (unclamped) trilinear product.
pub fn product<T: Real>(latents: &[Array2<T>; 3], c: Coord) -> T {
    let (u, v, w) = (
        latents[0].row(c.i),
        latents[1].row(c.j),
        latents[2].row(c.k),
    );
    (0..u.len()).map(|r| u[r] * v[r] * w[r]).sum()
}

pub fn generate<T: Real>(config: &SynthConfig) -> Result<SynthData<T>> {
    config.validate()?;
    let [n_t, n_i, n_k] = config.dims;
    let r = config.rank;
    let sd = T::lit((r as f64).powf(-0.25));
    let u = normal_matrix(
        n_t,
        r,
        sd,
        &mut stream(config.seed, 0, Purpose::Simulate, TARGETS),
    );
    let v = normal_matrix(
        n_i,
        r,
        sd,
        &mut stream(config.seed, 0, Purpose::Simulate, INDICATIONS),
    );
    let mut w = normal_matrix(
        n_k,
        r,
        sd,
        &mut stream(config.seed, 0, Purpose::Simulate, LAYERS),
    );
    let c = T::lit(config.coupling);
    let w0 = w.row(0).to_owned();
    for k in 1..n_k {
        let mut row = w.row_mut(k);
        for d in 0..r {
            row[d] = c * w0[d] + (T::one() - c) * row[d];
        }
    }
    let latents = [u, v, w];

    let mut rng = stream(config.seed, 0, Purpose::Simulate, CELLS);
    let (zero, one) = (T::zero(), T::one());
    let noise = T::lit(config.noise_sd);
    let mut truth = vec![zero; n_t * n_i * n_k];
    let mut tensor = SparseTensor::new(config.dims)?;
    for i in 0..n_t {
        for j in 0..n_i {
            for k in 0..n_k {
                let coord = Coord::new(i, j, k);
                let t = product(&latents, coord).max(zero).min(one);
                truth[dense_offset(config.dims, coord)] = t;
                // both draws happen for every cell so the mask and noise of
                // one cell never shift another's
                let eps = T::std_normal(&mut rng);
                let observed = rng.random::<f64>() < config.observed_fraction;
                if !observed {
                    continue;
                }
                let mut y = (t + noise * eps).max(zero).min(one);
                if k == 0 {
                    if let Some(th) = config.outcome_threshold {
                        y = if y >= T::lit(th) { one } else { zero };
                    }
                }
                tensor.insert(i, j, k, y)?;
            }
        }
    }
    Ok(SynthData {
        tensor,
        truth,
        latents,
    })
}

/// Layer names: `outcome` then `evidence_1`, `evidence_2`, ….
pub fn synth_index(dims: [usize; 3]) -> Result<TensorIndex> {
    let names = (0..dims[2])
        .map(|k| {
            if k == 0 {
                "outcome".to_string()
            } else {
                format!("evidence_{k}")
            }
        })
        .collect();
    numbered_index(dims, Some(names))
}

/// Tensor files plus `truth.tsv` in `dir`.
pub fn write_synth<T: Real>(dir: &Path, data: &SynthData<T>) -> Result<()> {
    let dims = data.tensor.dims();
    save_tensor(dir, &data.tensor, &synth_index(dims)?)?;
    write_dense_tsv(&dir.join(TRUTH_FILE), dims, &data.truth)
}
