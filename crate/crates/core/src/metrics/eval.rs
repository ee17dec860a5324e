use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{auroc, class_imbalance, f1};
use crate::error::{Error, Result};
use crate::sampler::{
    init_model, GibbsSampler, Hyperprior, ModelState, RunOutput, SamplerSchedule, DEFAULT_ALPHA,
    DEFAULT_LATENT_DIM,
};
use crate::scalar::Real;
use crate::tensor::{split_cells, Coord, SparseTensor};

/// Layer holding the labels being predicted.
pub const OUTCOME_LAYER_INDEX: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub latent_dim: usize,
    pub alpha: f64,
    pub schedule: SamplerSchedule,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            latent_dim: DEFAULT_LATENT_DIM,
            alpha: DEFAULT_ALPHA,
            schedule: SamplerSchedule::PUBLISHED,
        }
    }
}

/// Initialise from `seed` under the standard hyperprior, run the schedule
/// and average predictions over `query`.
pub fn fit_predict<T: Real>(
    tensor: &SparseTensor<T>,
    config: &FitConfig,
    seed: u64,
    query: &[Coord],
    threads: usize,
) -> Result<(ModelState<T>, RunOutput<T>)> {
    let prior = Hyperprior::standard(config.latent_dim)?;
    let mut state = init_model(
        tensor.dims(),
        config.latent_dim,
        &prior,
        T::lit(config.alpha),
        seed,
    )?;
    let sampler = GibbsSampler::new(tensor, prior).with_threads(threads)?;
    let out = sampler.run(&mut state, &config.schedule, query)?;
    Ok((state, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub model_name: String,
    pub fit: FitConfig,
    pub heldout_fraction: f64,
    pub threshold: f64,
    /// Repeats run concurrently on this many workers.
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            model_name: "combined".into(),
            fit: FitConfig::default(),
            heldout_fraction: 0.2,
            threshold: 0.5,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub auroc_mean: f64,
    pub auroc_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
    /// Positive fraction of the outcome layer.
    pub imbalance: f64,
    pub n_repeats: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatScore {
    pub seed: u64,
    pub auroc: f64,
    pub f1: f64,
}

/// Sample mean and sample standard deviation (n − 1 denominator).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// One repeat: stratified hold-out of the outcome layer, fit on the rest
/// (all evidence cells included), score the held-out cells.
pub fn evaluate_once<T: Real>(
    tensor: &SparseTensor<T>,
    config: &EvalConfig,
    seed: u64,
) -> Result<RepeatScore> {
    let split = split_cells(tensor, OUTCOME_LAYER_INDEX, config.heldout_fraction, seed)?;
    let train = tensor.without(&split.heldout);
    let query: Vec<Coord> = split.heldout.iter().copied().collect();
    let (_, out) = fit_predict(&train, &config.fit, seed, &query, 1)?;
    let half = T::lit(0.5);
    let labels: Vec<bool> = query
        .iter()
        .map(|&c| tensor.get(c).expect("held-out cell observed") >= half)
        .collect();
    let scores: Vec<T> = out.predictions.iter().map(|&(_, s)| s).collect();
    Ok(RepeatScore {
        seed,
        auroc: auroc(&scores, &labels)?,
        f1: f1(&scores, &labels, config.threshold)?,
    })
}

/// Run one repeat per seed and summarise as mean ± sample sd.
pub fn repeated_eval<T: Real>(
    tensor: &SparseTensor<T>,
    config: &EvalConfig,
    seeds: &[u64],
) -> Result<(EvalReport, Vec<RepeatScore>)> {
    if seeds.len() < 2 {
        return Err(Error::invalid(
            "repeated evaluation needs at least 2 repeats",
        ));
    }
    if !(config.threshold > 0.0 && config.threshold < 1.0) {
        return Err(Error::invalid(format!(
            "threshold must be in (0, 1), got {}",
            config.threshold
        )));
    }
    let half = T::lit(0.5);
    let labels: Vec<bool> = tensor
        .layer_entries(OUTCOME_LAYER_INDEX)
        .map(|e| e.value >= half)
        .collect();
    let imbalance = class_imbalance(&labels)?;

    let run = |&seed: &u64| evaluate_once(tensor, config, seed);
    let scores: Vec<RepeatScore> = if config.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| seeds.par_iter().map(run).collect::<Result<_>>())?
    } else {
        seeds.iter().map(run).collect::<Result<_>>()?
    };
    for s in &scores {
        log::info!(
            "{} seed {}: auroc {:.4} f1 {:.4}",
            config.model_name,
            s.seed,
            s.auroc,
            s.f1
        );
    }
    let (auroc_mean, auroc_sd) = mean_sd(&scores.iter().map(|s| s.auroc).collect::<Vec<_>>());
    let (f1_mean, f1_sd) = mean_sd(&scores.iter().map(|s| s.f1).collect::<Vec<_>>());
    Ok((
        EvalReport {
            model_name: config.model_name.clone(),
            auroc_mean,
            auroc_sd,
            f1_mean,
            f1_sd,
            imbalance,
            n_repeats: seeds.len(),
            threshold: config.threshold,
        },
        scores,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert_relative_eq!(s, (5.0f64 / 3.0).sqrt());
        assert_eq!(mean_sd(&[0.7, 0.7]).1, 0.0);
    }

    fn small_tensor() -> SparseTensor<f64> {
        // checkerboard labels, mirrored in the evidence layer
        let mut cells = Vec::new();
        for i in 0..8 {
            for j in 0..4 {
                let v = if (i + j) % 2 == 0 { 1.0 } else { 0.0 };
                cells.push((Coord::new(i, j, 0), v));
                cells.push((Coord::new(i, j, 1), v));
            }
        }
        SparseTensor::from_entries([8, 4, 2], cells).unwrap()
    }

    #[test]
    fn identical_seeds_have_zero_spread() {
        let t = small_tensor();
        let config = EvalConfig {
            fit: FitConfig {
                latent_dim: 3,
                alpha: 5.0,
                schedule: SamplerSchedule::new(5, 10, 5).unwrap(),
            },
            ..Default::default()
        };
        let (report, scores) = repeated_eval(&t, &config, &[3, 3]).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(report.auroc_sd, 0.0);
        assert_eq!(report.f1_sd, 0.0);
        assert_eq!(report.imbalance, 0.5);
        assert!((0.0..=1.0).contains(&report.auroc_mean));

        let threaded = EvalConfig {
            threads: 2,
            ..config.clone()
        };
        let (r2, _) = repeated_eval(&t, &threaded, &[3, 3]).unwrap();
        assert_eq!(r2, report);
        assert!(repeated_eval(&t, &config, &[3]).is_err());
    }

    #[test]
    fn report_fields() {
        let report = EvalReport {
            model_name: "m".into(),
            auroc_mean: 0.9,
            auroc_sd: 0.1,
            f1_mean: 0.5,
            f1_sd: 0.0,
            imbalance: 0.3,
            n_repeats: 2,
            threshold: 0.5,
        };
        let v = serde_json::to_value(&report).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            [
                "auroc_mean",
                "auroc_sd",
                "f1_mean",
                "f1_sd",
                "imbalance",
                "model_name",
                "n_repeats",
                "threshold"
            ]
        );
    }
}
